use super::{f_norm, Mask, UNIT_PEAK_SIGMA};
use crate::error::{Error, Result};
use crate::semgraph::{scene_distance, SceneCover};
use alloc::format;

/// Shared skeleton of the scene families: unassigned tokens get all-ones
/// rows and columns, everything else comes from `value(i, j)`.
fn scene_family(cover: &SceneCover, mut value: impl FnMut(usize, usize) -> f64) -> Mask {
    let n = cover.len();
    let assigned: alloc::vec::Vec<bool> = (0..n).map(|t| cover.is_assigned(t)).collect();
    Mask::from_fn(n, n, |i, j| {
        if !assigned[i] || !assigned[j] {
            1.0
        } else {
            value(i, j)
        }
    })
}

/// 1 where two tokens share a scene, 0 elsewhere.
pub fn binary_scene_mask(cover: &SceneCover) -> Mask {
    let membership = cover.membership();
    scene_family(cover, |i, j| {
        if i == j || membership[i].iter().any(|s| membership[j].contains(s)) {
            1.0
        } else {
            0.0
        }
    })
}

/// Like [`binary_scene_mask`] but out-of-scene pairs keep weight `c`.
pub fn scaled_scene_mask(cover: &SceneCover, c: f64) -> Result<Mask> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Config(format!(
            "scaled mask needs C in (0, 1), got {c}"
        )));
    }
    let binary = binary_scene_mask(cover);
    Ok(Mask::from_fn(binary.rows(), binary.cols(), |i, j| {
        if binary.get(i, j) == 1.0 {
            1.0
        } else {
            c
        }
    }))
}

/// Gaussian decay over scene-graph distance: `f_norm(c * dist)` with the
/// unit-peak sigma, i.e. `exp(-pi (c dist)^2)`. Same-scene pairs are exactly
/// 1 and disconnected pairs exactly 0.
pub fn normal_scene_mask(cover: &SceneCover, c: f64) -> Result<Mask> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!(
            "normal scene mask needs C > 0, got {c}"
        )));
    }
    let dist = scene_distance(cover);
    Ok(scene_family(cover, |i, j| match dist.get(i, j) {
        Some(0) => 1.0,
        Some(d) => f_norm(c * d as f64, UNIT_PEAK_SIGMA),
        None => 0.0,
    }))
}
