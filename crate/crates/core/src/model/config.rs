use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::masks::{MaskFamily, MaskSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub d_model: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub heads: usize,
    pub d_ff: usize,
    pub src_vocab: usize,
    pub trg_vocab: usize,
    /// Longest sequence the positional table covers.
    pub max_len: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d_model: 256,
            enc_layers: 4,
            dec_layers: 4,
            heads: 8,
            d_ff: 1024,
            src_vocab: 8000,
            trg_vocab: 8000,
            max_len: 256,
        }
    }
}

impl ModelConfig {
    pub fn d_k(&self) -> usize {
        self.d_model / self.heads
    }

    pub fn validate(&self) -> Result<()> {
        if self.heads == 0 || self.d_model == 0 || !self.d_model.is_multiple_of(self.heads) {
            return Err(Error::Config(format!(
                "d_model {} must be a positive multiple of heads {}",
                self.d_model, self.heads
            )));
        }
        if self.enc_layers == 0 || self.dec_layers == 0 {
            return Err(Error::Config(
                "need at least one encoder and one decoder layer".into(),
            ));
        }
        if self.src_vocab < 3 || self.trg_vocab < 3 || self.d_ff == 0 || self.max_len == 0 {
            return Err(Error::Config(
                "vocabularies need room for specials; d_ff and max_len must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Where a head lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Site {
    /// Encoder self-attention; the mask multiplies post-softmax weights.
    EncoderSelf,
    /// Decoder cross-attention; the mask aggregates encoder keys.
    Cross,
}

impl Site {
    pub fn name(self) -> &'static str {
        match self {
            Site::EncoderSelf => "encoder-self",
            Site::Cross => "cross",
        }
    }
}

/// Places one mask family on a set of heads in a set of layers. Layer and
/// head indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadSpec {
    pub site: Site,
    pub layers: Vec<usize>,
    pub heads: Vec<usize>,
    pub mask: MaskSpec,
}

impl HeadSpec {
    /// SASA: one binary-masked head in encoder layer 4.
    pub fn sasa() -> Self {
        HeadSpec {
            site: Site::EncoderSelf,
            layers: vec![4],
            heads: vec![1],
            mask: MaskSpec::binary(),
        }
    }

    /// SACrA: one scene-keyed cross-attention head in decoder layers 2 and 3.
    pub fn sacra() -> Self {
        HeadSpec {
            site: Site::Cross,
            layers: vec![2, 3],
            heads: vec![1],
            mask: MaskSpec::binary(),
        }
    }

    /// PASCAL: five heads of encoder layer 1.
    pub fn pascal() -> Self {
        HeadSpec {
            site: Site::EncoderSelf,
            layers: vec![1],
            heads: vec![1, 2, 3, 4, 5],
            mask: MaskSpec {
                family: MaskFamily::Pascal,
                c: 0.0,
            },
        }
    }

    /// UDISCAL: one head of encoder layer 1.
    pub fn udiscal() -> Self {
        HeadSpec {
            site: Site::EncoderSelf,
            layers: vec![1],
            heads: vec![1],
            mask: MaskSpec {
                family: MaskFamily::Udiscal,
                c: 0.0,
            },
        }
    }

    pub fn covers(&self, site: Site, layer: usize, head: usize) -> bool {
        self.site == site && self.layers.contains(&layer) && self.heads.contains(&head)
    }
}

/// Checks every spec against the model shape and rejects two specs
/// claiming the same `(site, layer, head)`.
pub fn validate_head_specs(specs: &[HeadSpec], cfg: &ModelConfig) -> Result<()> {
    let mut claimed: Vec<(Site, usize, usize)> = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        spec.mask.validate()?;
        let max_layer = match spec.site {
            Site::EncoderSelf => cfg.enc_layers,
            Site::Cross => cfg.dec_layers,
        };
        if spec.layers.is_empty() || spec.heads.is_empty() {
            return Err(Error::Config(format!("head spec {i} selects no heads")));
        }
        for &layer in &spec.layers {
            if layer == 0 || layer > max_layer {
                return Err(Error::Config(format!(
                    "head spec {i}: layer {layer} outside 1..={max_layer} at {}",
                    spec.site.name()
                )));
            }
            for &head in &spec.heads {
                if head == 0 || head > cfg.heads {
                    return Err(Error::Config(format!(
                        "head spec {i}: head {head} outside 1..={}",
                        cfg.heads
                    )));
                }
                if claimed.contains(&(spec.site, layer, head)) {
                    return Err(Error::Config(format!(
                        "{} layer {layer} head {head} has more than one mask",
                        spec.site.name()
                    )));
                }
                claimed.push((spec.site, layer, head));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub warmup: usize,
    pub label_smoothing: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub steps: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            warmup: 4000,
            label_smoothing: 0.1,
            beta1: 0.9,
            beta2: 0.98,
            adam_eps: 1e-9,
            batch_size: 128,
            steps: 150_000,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.label_smoothing) {
            return Err(Error::Config(format!(
                "label smoothing must be in [0, 1), got {}",
                self.label_smoothing
            )));
        }
        if self.warmup == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "warmup and batch size must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || self.adam_eps.is_nan()
            || self.adam_eps <= 0.0
        {
            return Err(Error::Config(
                "Adam betas must be in [0, 1) and epsilon positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeConfig {
    pub beam: usize,
    pub alpha: f64,
    pub max_len: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            beam: 4,
            alpha: 0.6,
            max_len: 200,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam == 0 {
            return Err(Error::Config("beam must be at least 1".into()));
        }
        if self.max_len == 0 {
            return Err(Error::Config("max output length must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let m = ModelConfig::default();
        assert_eq!((m.d_model, m.enc_layers, m.dec_layers), (256, 4, 4));
        let t = TrainConfig::default();
        assert_eq!(t.warmup, 4000);
        assert_eq!((t.label_smoothing, t.beta1, t.beta2), (0.1, 0.9, 0.98));
        let d = DecodeConfig::default();
        assert_eq!((d.beam, d.alpha), (4, 0.6));
    }

    #[test]
    fn paper_placements_fit_the_default_model() {
        let cfg = ModelConfig::default();
        for spec in [
            HeadSpec::sasa(),
            HeadSpec::sacra(),
            HeadSpec::pascal(),
            HeadSpec::udiscal(),
        ] {
            validate_head_specs(&[spec], &cfg).unwrap();
        }
        // semantic + syntactic combinations keep their separate placements
        validate_head_specs(&[HeadSpec::sasa(), HeadSpec::udiscal()], &cfg).unwrap();
        validate_head_specs(&[HeadSpec::sasa(), HeadSpec::pascal()], &cfg).unwrap();
        assert!(HeadSpec::sacra().covers(Site::Cross, 3, 1));
        assert!(!HeadSpec::sacra().covers(Site::EncoderSelf, 3, 1));
    }

    #[test]
    fn rejects_bad_specs() {
        let cfg = ModelConfig {
            heads: 4,
            ..ModelConfig::default()
        };
        let mut s = HeadSpec::sasa();
        s.layers = vec![5];
        assert!(validate_head_specs(&[s], &cfg).is_err());
        assert!(validate_head_specs(&[HeadSpec::pascal()], &cfg).is_err());
        assert!(validate_head_specs(&[HeadSpec::udiscal(), HeadSpec::udiscal()], &cfg).is_err());
        let ls = TrainConfig {
            label_smoothing: 1.0,
            ..TrainConfig::default()
        };
        assert!(ls.validate().is_err());
        assert!(DecodeConfig {
            beam: 0,
            ..DecodeConfig::default()
        }
        .validate()
        .is_err());
        assert!(ModelConfig {
            heads: 3,
            ..ModelConfig::default()
        }
        .validate()
        .is_err());
    }
}
