use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::DecodeConfig;
use crate::error::{Error, Result};

/// Next-token log-probabilities given the tokens generated so far.
pub trait StepScorer {
    fn log_probs(&mut self, prefix: &[usize]) -> Result<Vec<f64>>;
}

impl<F: FnMut(&[usize]) -> Result<Vec<f64>>> StepScorer for F {
    fn log_probs(&mut self, prefix: &[usize]) -> Result<Vec<f64>> {
        self(prefix)
    }
}

/// A decoded sequence. `tokens` excludes the end-of-sentence id; `finished`
/// is false when decoding hit the length limit first.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub tokens: Vec<usize>,
    pub log_prob: f64,
    pub score: f64,
    pub finished: bool,
}

/// GNMT length penalty `((5 + len) / 6)^alpha`.
pub fn length_penalty(len: usize, alpha: f64) -> f64 {
    libm::pow((5.0 + len as f64) / 6.0, alpha)
}

/// Higher score first, then lexicographically smaller tokens.
fn rank(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.tokens.cmp(&b.tokens))
}

/// Beam search with length-normalized final scores
/// `log_prob / length_penalty(len, alpha)`, where `len` counts the
/// end-of-sentence token for finished hypotheses. Each step keeps the
/// `beam` best expansions (ties broken by lower token id); those ending in
/// `eos` are set aside. Search stops once `beam` hypotheses have finished.
pub fn beam_search<S: StepScorer + ?Sized>(
    scorer: &mut S,
    cfg: &DecodeConfig,
    eos: usize,
) -> Result<Hypothesis> {
    cfg.validate()?;
    let mut live: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 0.0)];
    let mut finished: Vec<Hypothesis> = Vec::new();

    for _ in 0..cfg.max_len {
        // (log_prob, beam index, token)
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for (b, (tokens, lp)) in live.iter().enumerate() {
            let step = scorer.log_probs(tokens)?;
            if step.is_empty() {
                return Err(Error::Contract("scorer returned no tokens".into()));
            }
            candidates.extend(step.iter().enumerate().map(|(tok, s)| (lp + s, b, tok)));
        }
        candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

        let mut next = Vec::with_capacity(cfg.beam);
        for &(lp, b, tok) in candidates.iter().take(cfg.beam) {
            let mut tokens = live[b].0.clone();
            if tok == eos {
                let len = tokens.len() + 1;
                finished.push(Hypothesis {
                    tokens,
                    log_prob: lp,
                    score: lp / length_penalty(len, cfg.alpha),
                    finished: true,
                });
            } else {
                tokens.push(tok);
                next.push((tokens, lp));
            }
        }
        live = next;
        if finished.len() >= cfg.beam || live.is_empty() {
            break;
        }
    }

    if finished.is_empty() {
        finished = live
            .into_iter()
            .map(|(tokens, lp)| {
                let len = tokens.len();
                Hypothesis {
                    tokens,
                    log_prob: lp,
                    score: lp / length_penalty(len, cfg.alpha),
                    finished: false,
                }
            })
            .collect();
    }
    finished.sort_by(rank);
    finished
        .into_iter()
        .next()
        .ok_or_else(|| Error::Contract("beam search produced no hypothesis".into()))
}

/// Argmax decoding (lowest id on ties) until `eos` or `max_len` tokens.
pub fn greedy_decode<S: StepScorer + ?Sized>(
    scorer: &mut S,
    max_len: usize,
    eos: usize,
) -> Result<Hypothesis> {
    let mut tokens = Vec::new();
    let mut log_prob = 0.0;
    for _ in 0..max_len {
        let step = scorer.log_probs(&tokens)?;
        let (best, lp) = step
            .iter()
            .copied()
            .enumerate()
            .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
                Some((_, bv)) if bv >= v => acc,
                _ => Some((i, v)),
            })
            .ok_or_else(|| Error::Contract("scorer returned no tokens".into()))?;
        log_prob += lp;
        if best == eos {
            return Ok(Hypothesis {
                score: log_prob,
                tokens,
                log_prob,
                finished: true,
            });
        }
        tokens.push(best);
    }
    Ok(Hypothesis {
        score: log_prob,
        tokens,
        log_prob,
        finished: false,
    })
}
