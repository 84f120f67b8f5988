use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::END_OF_WORD;
use crate::error::{Error, Result};
use crate::masks::Alignment;

/// Surface form of a subword.
pub fn strip_marker(subword: &str) -> &str {
    subword.strip_suffix(END_OF_WORD).unwrap_or(subword)
}

/// Maps each word onto the contiguous run of subwords that spells it.
pub fn word_subword_alignment<W: AsRef<str>, S: AsRef<str>>(
    words: &[W],
    subwords: &[S],
) -> Result<Alignment> {
    let mut ranges = Vec::with_capacity(words.len());
    let mut next = 0;
    for (w, word) in words.iter().enumerate() {
        let word = word.as_ref();
        if word.is_empty() {
            return Err(Error::Alignment(format!("word {w} is empty")));
        }
        let start = next;
        let mut built = String::new();
        while built.len() < word.len() {
            let piece = subwords
                .get(next)
                .map(|s| strip_marker(s.as_ref()))
                .ok_or_else(|| {
                    Error::Alignment(format!("ran out of subwords inside word {w} `{word}`"))
                })?;
            if piece.is_empty() {
                return Err(Error::Alignment(format!(
                    "empty subword at position {next}"
                )));
            }
            built.push_str(piece);
            next += 1;
        }
        if built != word {
            return Err(Error::Alignment(format!(
                "subwords {start}..{next} spell `{built}`, expected `{word}`"
            )));
        }
        ranges.push((start, next - 1));
    }
    if next != subwords.len() {
        return Err(Error::Alignment(format!(
            "{} subwords left over after the last word",
            subwords.len() - next
        )));
    }
    Alignment::new(ranges)
}
