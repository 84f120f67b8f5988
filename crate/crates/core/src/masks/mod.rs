//! Attention masks: multiplicative weights in `[0, 1]` applied to an
//! attention head's post-softmax scores.
//!
//! Scene families (binary, scaled, normal) are built at word level from a
//! [`SceneCover`] and block-expanded to subwords with [`expand_to_subwords`].
//! The dependency families (PASCAL, UDISCAL) are built from a [`UdGraph`].

mod align;
mod dependency;
mod scene;

pub use align::{expand_to_subwords, Alignment};
pub use dependency::{pascal_mask, udiscal_mask};
pub use scene::{binary_scene_mask, normal_scene_mask, scaled_scene_mask};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::semgraph::{SceneCover, UdGraph};

/// Standard deviation that makes the normal density equal 1 at zero.
pub const UNIT_PEAK_SIGMA: f64 = 0.398_942_280_401_432_7; // 1 / sqrt(2 pi)

/// Normal probability density with mean 0 and standard deviation `sigma`.
pub fn f_norm(x: f64, sigma: f64) -> f64 {
    let var = sigma * sigma;
    libm::exp(-x * x / (2.0 * var)) / libm::sqrt(2.0 * PI * var)
}

/// Row-major matrix of attention multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Mask {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values for a {rows}x{cols} mask",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Contract(format!("mask value {v} outside [0, 1]")));
        }
        Ok(Mask { rows, cols, values })
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Mask {
            rows: n,
            cols: n,
            values: vec![value; n * n],
        }
    }

    pub fn ones(n: usize) -> Self {
        Self::filled(n, 1.0)
    }

    pub(crate) fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        Mask { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MaskFamily {
    Binary,
    Scaled,
    NormalScene,
    Pascal,
    Udiscal,
}

impl MaskFamily {
    pub const ALL: [MaskFamily; 5] = [
        MaskFamily::Binary,
        MaskFamily::Scaled,
        MaskFamily::NormalScene,
        MaskFamily::Pascal,
        MaskFamily::Udiscal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MaskFamily::Binary => "binary",
            MaskFamily::Scaled => "scaled",
            MaskFamily::NormalScene => "normal",
            MaskFamily::Pascal => "pascal",
            MaskFamily::Udiscal => "udiscal",
        }
    }

    /// Scene families need a scene cover; the others a dependency tree.
    pub fn is_scene_based(self) -> bool {
        matches!(
            self,
            MaskFamily::Binary | MaskFamily::Scaled | MaskFamily::NormalScene
        )
    }
}

impl fmt::Display for MaskFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MaskFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MaskFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mask family `{s}`")))
    }
}

/// A mask family together with its scale hyperparameter `c` (off-scene
/// value for `Scaled`, distance multiplier for `NormalScene`, unused
/// otherwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskSpec {
    pub family: MaskFamily,
    pub c: f64,
}

/// The structure a mask is derived from.
#[derive(Debug, Clone, Copy)]
pub enum MaskSource<'a> {
    Scenes(&'a SceneCover),
    Tree(&'a UdGraph),
}

impl MaskSpec {
    pub fn new(family: MaskFamily, c: f64) -> Result<Self> {
        let spec = MaskSpec { family, c };
        spec.validate()?;
        Ok(spec)
    }

    pub fn binary() -> Self {
        MaskSpec {
            family: MaskFamily::Binary,
            c: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            MaskFamily::Scaled if !(self.c > 0.0 && self.c < 1.0) => Err(Error::Config(format!(
                "scaled mask needs C in (0, 1), got {}",
                self.c
            ))),
            MaskFamily::NormalScene if !(self.c > 0.0 && self.c.is_finite()) => Err(Error::Config(
                format!("normal scene mask needs C > 0, got {}", self.c),
            )),
            _ => Ok(()),
        }
    }

    pub fn sigma(&self) -> f64 {
        match self.family {
            MaskFamily::NormalScene => UNIT_PEAK_SIGMA,
            _ => 1.0,
        }
    }

    /// Builds the subword-level mask for one sentence.
    pub fn build(&self, source: MaskSource<'_>, align: &Alignment) -> Result<Mask> {
        match (self.family, source) {
            (MaskFamily::Binary, MaskSource::Scenes(c)) => {
                expand_to_subwords(&binary_scene_mask(c), align)
            }
            (MaskFamily::Scaled, MaskSource::Scenes(c)) => {
                expand_to_subwords(&scaled_scene_mask(c, self.c)?, align)
            }
            (MaskFamily::NormalScene, MaskSource::Scenes(c)) => {
                expand_to_subwords(&normal_scene_mask(c, self.c)?, align)
            }
            (MaskFamily::Pascal, MaskSource::Tree(t)) => pascal_mask(t, align),
            (MaskFamily::Udiscal, MaskSource::Tree(t)) => udiscal_mask(t, align),
            (family, _) => Err(Error::Contract(format!(
                "{family} masks need {}",
                if family.is_scene_based() {
                    "a scene cover"
                } else {
                    "a dependency tree"
                }
            ))),
        }
    }
}
