//! File formats and the `scenemt` command-line driver on top of
//! `scenemt-core`.

pub mod cli;
mod error;
pub mod io;

pub use error::CliError;
