#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use scenemt_core::numcore::Tensor;
use scenemt_core::semgraph::{MainRelation, RelationKind, Scene, SceneCover};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn below(r: &mut ChaCha8Rng, n: usize) -> usize {
    (r.next_u64() % n as u64) as usize
}

/// Uniform in `[-1, 1)`.
pub fn unit(r: &mut ChaCha8Rng) -> f64 {
    (r.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

pub fn tensor(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    Tensor::new(&[rows, cols], (0..rows * cols).map(|_| unit(r)).collect()).unwrap()
}

/// Parent array of a uniformly shaped random tree over `n` nodes.
pub fn random_tree(r: &mut ChaCha8Rng, n: usize) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, below(r, i + 1));
    }
    let mut heads = vec![None; n];
    for k in 1..n {
        heads[order[k]] = Some(order[below(r, k)]);
    }
    heads
}

/// Up to `max_scenes` random non-empty scenes over `n` tokens.
pub fn random_cover(r: &mut ChaCha8Rng, n: usize, max_scenes: usize) -> SceneCover {
    let k = below(r, max_scenes + 1);
    let scenes = (0..k)
        .map(|_| {
            let mut tokens: Vec<usize> = (0..n).filter(|_| below(r, 3) == 0).collect();
            if tokens.is_empty() {
                tokens.push(below(r, n));
            }
            Scene {
                id: 0,
                main: MainRelation {
                    kind: if below(r, 2) == 0 {
                        RelationKind::Process
                    } else {
                        RelationKind::State
                    },
                    tokens: vec![tokens[0]],
                },
                tokens,
                participants: vec![],
            }
        })
        .collect();
    SceneCover::new(n, scenes).unwrap()
}
