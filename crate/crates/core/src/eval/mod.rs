//! Corpus-level BLEU and chrF, and the paired sign test.

mod bleu;
mod chrf;
mod sign;

pub use bleu::{bleu, sentence_bleu};
pub use chrf::{chrf, ChrfConfig};
pub use sign::sign_test;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub metric: String,
    /// Corpus score in `[0, 100]`.
    pub score: f64,
    pub sentences: usize,
    pub per_sentence: Option<Vec<f64>>,
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "metric={} score={:.2} n={}",
            self.metric, self.score, self.sentences
        )
    }
}

pub(crate) fn check_lengths<H, R>(hyps: &[H], refs: &[R]) -> Result<()> {
    if hyps.len() != refs.len() {
        return Err(Error::Contract(format!(
            "{} hypotheses for {} references",
            hyps.len(),
            refs.len()
        )));
    }
    Ok(())
}
