use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::optim::{lr_schedule, Adam};
use super::{HeadSpec, ModelConfig, TrainConfig, Transformer};
use crate::error::{Error, Result};
use crate::masks::Mask;
use crate::numcore::Graph;

/// One training pair in id space; `trg` carries no specials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample {
    pub src: Vec<usize>,
    pub trg: Vec<usize>,
}

/// Supplies the per-head-spec masks of a source sentence.
pub trait MaskProvider {
    fn masks(&self, index: usize, src: &[usize]) -> Result<Vec<Mask>>;
}

/// Precomputed masks, one list per sentence.
impl MaskProvider for [Vec<Mask>] {
    fn masks(&self, index: usize, _src: &[usize]) -> Result<Vec<Mask>> {
        self.get(index)
            .cloned()
            .ok_or_else(|| Error::Contract(format!("no masks for sentence {index}")))
    }
}

impl MaskProvider for Vec<Vec<Mask>> {
    fn masks(&self, index: usize, src: &[usize]) -> Result<Vec<Mask>> {
        self.as_slice().masks(index, src)
    }
}

impl<F: Fn(usize, &[usize]) -> Result<Vec<Mask>>> MaskProvider for F {
    fn masks(&self, index: usize, src: &[usize]) -> Result<Vec<Mask>> {
        self(index, src)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean per-token loss of every step, before that step's update.
    pub losses: Vec<f64>,
}

fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    order
}

/// Trains a fresh model. Masks for every sentence are fetched and checked
/// before the first step. The run is a deterministic function of its
/// inputs and `train_cfg.seed`.
pub fn train<M: MaskProvider + ?Sized>(
    pairs: &[TrainExample],
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
    head_specs: &[HeadSpec],
    masks: &M,
) -> Result<(Transformer, TrainReport)> {
    train_cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::Contract("no training pairs".into()));
    }
    let mut model = Transformer::new(model_cfg.clone(), head_specs.to_vec(), train_cfg.seed)?;

    let mut all_masks = Vec::with_capacity(pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        let m = masks.masks(i, &p.src)?;
        if m.len() != head_specs.len()
            || m.iter()
                .any(|m| m.rows() != p.src.len() || m.cols() != p.src.len())
        {
            return Err(Error::Contract(format!(
                "sentence {i}: need {} masks of size {}",
                head_specs.len(),
                p.src.len()
            )));
        }
        all_masks.push(m);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(train_cfg.seed ^ 0x5eed_da7a);
    let mut order = shuffled(pairs.len(), &mut rng);
    let mut cursor = 0;
    let mut adam = Adam::new(train_cfg, model.params());
    let mut losses = Vec::with_capacity(train_cfg.steps);

    for step in 0..train_cfg.steps {
        let mut g = Graph::new();
        let vars = model.bind(&mut g);
        let mut total = None;
        let mut tokens = 0;
        for _ in 0..train_cfg.batch_size.min(pairs.len()) {
            if cursor == order.len() {
                order = shuffled(pairs.len(), &mut rng);
                cursor = 0;
            }
            let i = order[cursor];
            cursor += 1;
            let p = &pairs[i];
            let (loss, n) = model.loss(
                &mut g,
                &vars,
                &p.src,
                &p.trg,
                &all_masks[i],
                train_cfg.label_smoothing,
            )?;
            tokens += n;
            total = Some(match total {
                Some(t) => g.add(t, loss)?,
                None => loss,
            });
        }
        let total = total.expect("batch is non-empty");
        let mean = g.scale(total, 1.0 / tokens as f64);
        let value = g.value(mean)[0];
        if !value.is_finite() {
            return Err(Error::NonFinite { step });
        }
        losses.push(value);

        let grads = g.backward(mean)?;
        let grads: Vec<Vec<f64>> = vars
            .iter()
            .zip(model.params())
            .map(|(&v, p)| grads.get_or_zeros(v, p.len()))
            .collect();
        if grads.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite { step });
        }
        let lr = lr_schedule(step + 1, train_cfg, model_cfg.d_model);
        adam.step(model.params_mut(), &grads, lr);
    }
    Ok((model, TrainReport { losses }))
}

/// Position-wise agreement of greedy outputs with references, counted over
/// the longer of the two sequences.
pub fn token_accuracy<M: MaskProvider + ?Sized>(
    model: &Transformer,
    pairs: &[TrainExample],
    masks: &M,
) -> Result<f64> {
    let mut correct = 0usize;
    let mut total = 0usize;
    for (i, p) in pairs.iter().enumerate() {
        let m = masks.masks(i, &p.src)?;
        let hyp = model.greedy(&p.src, &m, p.trg.len() + 2)?;
        let n = hyp.tokens.len().max(p.trg.len());
        total += n;
        correct += hyp
            .tokens
            .iter()
            .zip(&p.trg)
            .filter(|(a, b)| a == b)
            .count();
    }
    if total == 0 {
        return Err(Error::Undefined("no reference tokens".into()));
    }
    Ok(correct as f64 / total as f64)
}
