use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::SceneCover;
use crate::error::{Error, Result};

/// Splits a sentence into one sub-sentence per scene, keeping each scene's
/// tokens in their original order. Tokens outside every scene are dropped.
/// A cover with zero or one scene leaves the sentence whole.
pub fn sem_split<T: Clone>(tokens: &[T], cover: &SceneCover) -> Result<Vec<Vec<T>>> {
    if tokens.len() != cover.len() {
        return Err(Error::Contract(format!(
            "sentence has {} tokens but the cover has length {}",
            tokens.len(),
            cover.len()
        )));
    }
    if cover.scenes().len() <= 1 {
        return Ok(vec![tokens.to_vec()]);
    }
    Ok(cover
        .scenes()
        .iter()
        .map(|s| s.tokens.iter().map(|&t| tokens[t].clone()).collect())
        .collect())
}
