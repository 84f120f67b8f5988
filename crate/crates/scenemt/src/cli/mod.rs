//! The `scenemt` command line. Every command writes its outputs and a
//! `manifest.txt` into `--out`; `replay` re-runs a manifest.

mod commands;
mod structures;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "scenemt",
    version,
    about = "Scene-aware attention masks for NMT"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Where per-sentence structures come from. Each file holds one record per
/// source sentence, in corpus order.
#[derive(Debug, Clone, Args, Default)]
pub struct StructureArgs {
    /// UCCA graph file; scenes are extracted from each graph.
    #[arg(long, value_name = "FILE", conflicts_with = "scenes")]
    pub ucca: Option<PathBuf>,
    /// Scene-cover file (`#L` header, `S` lines).
    #[arg(long, value_name = "FILE")]
    pub scenes: Option<PathBuf>,
    /// CoNLL-U file for the dependency families.
    #[arg(long, value_name = "FILE")]
    pub conllu: Option<PathBuf>,
    /// Subword counts per word, one sentence per line. Without it every
    /// word is one token.
    #[arg(long, value_name = "FILE")]
    pub align: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 256)]
    pub d_model: usize,
    /// Encoder and decoder depth.
    #[arg(long, default_value_t = 4)]
    pub layers: usize,
    #[arg(long, default_value_t = 8)]
    pub heads: usize,
    #[arg(long, default_value_t = 1024)]
    pub d_ff: usize,
    /// Longest sequence the model accepts.
    #[arg(long, default_value_t = 256)]
    pub max_len: usize,
}

/// Head placements. Each flag takes optional `key=value` words: `layers`,
/// `heads` (comma lists, 1-based), `family`, `C`, `site`.
#[derive(Debug, Clone, Args, Default)]
pub struct HeadArgs {
    /// Scene-masked encoder self-attention (default: layer 4, head 1, binary).
    #[arg(long, num_args = 0.., value_name = "KEY=VALUE")]
    pub sasa: Option<Vec<String>>,
    /// Scene-keyed cross-attention (default: layers 2,3, head 1).
    #[arg(long, num_args = 0.., value_name = "KEY=VALUE")]
    pub sacra: Option<Vec<String>>,
    /// Parent-centred dependency mask (default: layer 1, heads 1-5).
    #[arg(long, num_args = 0.., value_name = "KEY=VALUE")]
    pub pascal: Option<Vec<String>>,
    /// Tree-distance dependency mask (default: layer 1, head 1).
    #[arg(long, num_args = 0.., value_name = "KEY=VALUE")]
    pub udiscal: Option<Vec<String>>,
    /// Any further placement as one quoted argument, e.g.
    /// `--head "site=cross layers=1 heads=2"`. Repeatable.
    #[arg(long, value_name = "SPEC")]
    pub head: Vec<String>,
    /// Mask scale for the scaled and normal families.
    #[arg(long = "C", value_name = "C")]
    pub c: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Writes the bundled copy-task corpus with synthetic scene covers.
    CopyTask {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[arg(long, default_value_t = 12)]
        vocab: usize,
        #[arg(long, default_value_t = 3)]
        min_len: usize,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        /// Scene width and overlap of the synthetic covers.
        #[arg(long, default_value_t = 3)]
        window: usize,
        #[arg(long, default_value_t = 1)]
        overlap: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// One mask file per sentence.
    Masks {
        #[arg(long)]
        family: String,
        #[arg(long = "C", value_name = "C", default_value_t = 0.0)]
        c: f64,
        #[command(flatten)]
        structures: StructureArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Trains a model; writes checkpoint, vocabularies, losses and accuracy.
    Train {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        trg: PathBuf,
        #[command(flatten)]
        structures: StructureArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        heads: HeadArgs,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long, default_value_t = 128)]
        batch: usize,
        #[arg(long, default_value_t = 4000)]
        warmup: usize,
        #[arg(long, default_value_t = 0.1)]
        label_smoothing: f64,
        #[arg(long, default_value_t = 1e-9)]
        adam_eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decodes a source file with a trained model.
    Translate {
        /// Directory written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        src: PathBuf,
        #[command(flatten)]
        structures: StructureArgs,
        #[arg(long, default_value_t = 4)]
        beam: usize,
        #[arg(long, default_value_t = 0.6)]
        alpha: f64,
        #[arg(long)]
        greedy: bool,
        #[arg(long, default_value_t = 200)]
        max_len: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Corpus BLEU and chrF with per-sentence scores.
    Evaluate {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, default_value_t = 3.0)]
        beta: f64,
        #[arg(long, default_value_t = 1)]
        word_order: usize,
        #[arg(long, default_value_t = 6)]
        char_order: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Splits each source sentence into one piece per scene.
    Split {
        #[arg(long)]
        src: PathBuf,
        #[command(flatten)]
        structures: StructureArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rejoins translated pieces with a period between them.
    Join {
        #[arg(long)]
        pieces: PathBuf,
        /// The `index.txt` written by `split`.
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sign test of system B against system A over paired score files.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Length and ratio filtering of a parallel corpus.
    Filter {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        trg: PathBuf,
        #[arg(long, default_value_t = 100)]
        max_len: usize,
        #[arg(long, default_value_t = 1.5)]
        max_ratio: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learns BPE merges and segments the corpus with them.
    Bpe {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        merges: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-runs the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Output directory to use instead of the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (without the program name) and runs the command. Returns
/// the text meant for standard output.
pub fn run(args: &[String]) -> Result<String> {
    let mut full = vec!["scenemt".to_string()];
    full.extend_from_slice(args);
    let cli = Cli::try_parse_from(&full).map_err(|e| CliError::Usage(e.to_string()))?;
    commands::dispatch(cli.command, args)
}

/// Entry point of the binary: prints output or the error and returns the
/// process exit code.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let args: Vec<OsString> = args.into_iter().skip(1).collect();
    let args: Option<Vec<String>> = args.into_iter().map(|a| a.into_string().ok()).collect();
    let Some(args) = args else {
        eprintln!("error: arguments must be valid UTF-8");
        return 2;
    };
    let mut full = vec!["scenemt".to_string()];
    full.extend_from_slice(&args);
    let cli = match Cli::try_parse_from(&full) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(cli.command, &args) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
