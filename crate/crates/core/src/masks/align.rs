use alloc::format;
use alloc::vec::Vec;

use super::Mask;
use crate::error::{Error, Result};

/// Word-to-subword map: word `w` owns the inclusive subword range
/// `ranges[w]`. Ranges are ordered, contiguous and cover every subword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    ranges: Vec<(usize, usize)>,
}

impl Alignment {
    pub fn new(ranges: Vec<(usize, usize)>) -> Result<Self> {
        let mut next = 0;
        for (w, &(start, end)) in ranges.iter().enumerate() {
            if start != next {
                return Err(Error::Alignment(format!(
                    "word {w} starts at subword {start}, expected {next}"
                )));
            }
            if end < start {
                return Err(Error::Alignment(format!(
                    "word {w} has empty range {start}..={end}"
                )));
            }
            next = end + 1;
        }
        Ok(Alignment { ranges })
    }

    /// Builds an alignment from per-word subword counts.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        let mut ranges = Vec::with_capacity(counts.len());
        let mut start = 0;
        for (w, &c) in counts.iter().enumerate() {
            if c == 0 {
                return Err(Error::Alignment(format!("word {w} has no subwords")));
            }
            ranges.push((start, start + c - 1));
            start += c;
        }
        Ok(Alignment { ranges })
    }

    pub fn identity(n: usize) -> Self {
        Alignment {
            ranges: (0..n).map(|i| (i, i)).collect(),
        }
    }

    pub fn word_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn subword_count(&self) -> usize {
        self.ranges.last().map_or(0, |&(_, end)| end + 1)
    }

    pub fn range(&self, word: usize) -> (usize, usize) {
        self.ranges[word]
    }

    pub fn ranges(&self) -> &[(usize, usize)] {
        &self.ranges
    }

    /// Owning word of every subword position.
    pub fn word_of_subwords(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.subword_count());
        for (w, &(start, end)) in self.ranges.iter().enumerate() {
            out.extend(core::iter::repeat_n(w, end - start + 1));
        }
        out
    }
}

/// Block-expands a word-level mask: `M'[a, b] = M[word(a), word(b)]`.
pub fn expand_to_subwords(word_mask: &Mask, align: &Alignment) -> Result<Mask> {
    if !word_mask.is_square() || word_mask.rows() != align.word_count() {
        return Err(Error::Dimension(format!(
            "{}x{} word mask for an alignment over {} words",
            word_mask.rows(),
            word_mask.cols(),
            align.word_count()
        )));
    }
    let words = align.word_of_subwords();
    let n = words.len();
    Ok(Mask::from_fn(n, n, |a, b| {
        word_mask.get(words[a], words[b])
    }))
}
