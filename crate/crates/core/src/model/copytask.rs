use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::TrainExample;
use crate::error::{Error, Result};
use crate::semgraph::{MainRelation, RelationKind, Scene, SceneCover};

/// `n` copy pairs (`trg == src`) over content ids `2..vocab`, lengths drawn
/// uniformly from `min_len..=max_len`.
pub fn copy_task(
    n: usize,
    vocab: usize,
    min_len: usize,
    max_len: usize,
    seed: u64,
) -> Result<Vec<TrainExample>> {
    // ids 0 and 1 are the specials
    if vocab < 3 {
        return Err(Error::Config(format!(
            "vocab {vocab} leaves no content ids"
        )));
    }
    if min_len == 0 || min_len > max_len {
        return Err(Error::Config(format!(
            "bad length range {min_len}..={max_len}"
        )));
    }
    let content = (vocab - 2) as u64;
    let span = (max_len - min_len + 1) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let len = min_len + (rng.next_u64() % span) as usize;
            let src: Vec<usize> = (0..len)
                .map(|_| 2 + (rng.next_u64() % content) as usize)
                .collect();
            TrainExample {
                trg: src.clone(),
                src,
            }
        })
        .collect())
}

/// A synthetic cover of windows of `width` tokens, consecutive windows
/// sharing `overlap` tokens. The first token of each window is its main
/// relation.
pub fn window_cover(len: usize, width: usize, overlap: usize) -> Result<SceneCover> {
    if width == 0 || overlap >= width {
        return Err(Error::Config(format!(
            "window {width} with overlap {overlap}"
        )));
    }
    let mut scenes = Vec::new();
    let mut start = 0;
    while start < len {
        let end = (start + width).min(len);
        scenes.push(Scene {
            id: 0,
            tokens: (start..end).collect(),
            main: MainRelation {
                kind: RelationKind::Process,
                tokens: vec![start],
            },
            participants: Vec::new(),
        });
        if end == len {
            break;
        }
        start = end - overlap;
    }
    SceneCover::new(len, scenes)
}
