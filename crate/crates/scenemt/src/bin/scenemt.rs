fn main() {
    std::process::exit(scenemt::cli::main_with_args(std::env::args_os()));
}
