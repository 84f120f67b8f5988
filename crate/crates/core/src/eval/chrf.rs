use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::{check_lengths, ScoreReport};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChrfConfig {
    pub beta: f64,
    pub word_order: usize,
    pub char_order: usize,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        ChrfConfig {
            beta: 3.0,
            word_order: 1,
            char_order: 6,
        }
    }
}

/// Per order: (clipped matches, hypothesis n-grams, reference n-grams).
type OrderStats = Vec<[usize; 3]>;

fn counts<T: Ord>(seq: &[T], n: usize) -> BTreeMap<&[T], usize> {
    let mut m = BTreeMap::new();
    if seq.len() >= n {
        for w in seq.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

fn order_stats<T: Ord>(hyp: &[T], reference: &[T], n: usize) -> [usize; 3] {
    let (hc, rc) = (counts(hyp, n), counts(reference, n));
    let matches = hc
        .iter()
        .map(|(g, c)| (*c).min(rc.get(g).copied().unwrap_or(0)))
        .sum();
    [
        matches,
        hyp.len().saturating_sub(n - 1),
        reference.len().saturating_sub(n - 1),
    ]
}

fn sentence_stats(hyp: &str, reference: &str, cfg: &ChrfConfig) -> OrderStats {
    let chars = |s: &str| {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .collect::<Vec<char>>()
    };
    let (hc, rc) = (chars(hyp), chars(reference));
    let hw: Vec<&str> = hyp.split_whitespace().collect();
    let rw: Vec<&str> = reference.split_whitespace().collect();
    let mut out = Vec::with_capacity(cfg.char_order + cfg.word_order);
    for n in 1..=cfg.char_order {
        out.push(order_stats(&hc, &rc, n));
    }
    for n in 1..=cfg.word_order {
        out.push(order_stats(&hw, &rw, n));
    }
    out
}

/// Averages precision and recall over the orders that have n-grams on at
/// least one side, then combines them with an F-beta.
fn f_score(stats: &OrderStats, beta: f64) -> f64 {
    let mut p_sum = 0.0;
    let mut r_sum = 0.0;
    let mut orders = 0usize;
    for &[m, h, r] in stats {
        if h == 0 && r == 0 {
            continue;
        }
        orders += 1;
        if h > 0 {
            p_sum += m as f64 / h as f64;
        }
        if r > 0 {
            r_sum += m as f64 / r as f64;
        }
    }
    if orders == 0 {
        return 0.0;
    }
    let (p, r) = (p_sum / orders as f64, r_sum / orders as f64);
    let b2 = beta * beta;
    if p + r == 0.0 {
        return 0.0;
    }
    100.0 * (1.0 + b2) * p * r / (b2 * p + r)
}

/// Corpus chrF with word n-grams (chrF+ at the default `word_order = 1`).
/// Character n-grams ignore whitespace; statistics are summed over the
/// corpus before precision and recall are taken.
pub fn chrf<H: AsRef<str>, R: AsRef<str>>(
    hyps: &[H],
    refs: &[R],
    cfg: &ChrfConfig,
) -> Result<ScoreReport> {
    check_lengths(hyps, refs)?;
    let orders = cfg.char_order + cfg.word_order;
    let mut total: OrderStats = alloc::vec![[0; 3]; orders];
    let mut per = Vec::with_capacity(hyps.len());
    for (h, r) in hyps.iter().zip(refs) {
        let s = sentence_stats(h.as_ref(), r.as_ref(), cfg);
        per.push(f_score(&s, cfg.beta));
        for (t, o) in total.iter_mut().zip(&s) {
            for k in 0..3 {
                t[k] += o[k];
            }
        }
    }
    Ok(ScoreReport {
        metric: "chrf".to_string(),
        score: f_score(&total, cfg.beta),
        sentences: hyps.len(),
        per_sentence: Some(per),
    })
}
