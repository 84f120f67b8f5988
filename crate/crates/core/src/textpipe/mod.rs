//! Corpus preparation: length/ratio filtering with pluggable hooks, byte
//! pair encoding, and word-to-subword alignment.

mod align;
mod bpe;
mod filter;

pub use align::{strip_marker, word_subword_alignment};
pub use bpe::{apply_bpe, train_bpe, BpeModel, END_OF_WORD};
pub use filter::{filter_corpus, FilterConfig, PairFilter, PairTransform, ParallelPair};
