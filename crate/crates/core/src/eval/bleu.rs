use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::{check_lengths, ScoreReport};
use crate::error::Result;

const MAX_ORDER: usize = 4;

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> BTreeMap<&'a [&'a str], usize> {
    let mut out = BTreeMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w).or_insert(0) += 1;
        }
    }
    out
}

/// Clipped matches and hypothesis n-gram totals per order, plus lengths.
#[derive(Debug, Default, Clone, Copy)]
struct Stats {
    matches: [usize; MAX_ORDER],
    totals: [usize; MAX_ORDER],
    hyp_len: usize,
    ref_len: usize,
}

impl Stats {
    fn of(hyp: &str, reference: &str) -> Stats {
        let h: Vec<&str> = hyp.split_whitespace().collect();
        let r: Vec<&str> = reference.split_whitespace().collect();
        let mut s = Stats {
            hyp_len: h.len(),
            ref_len: r.len(),
            ..Stats::default()
        };
        for n in 1..=MAX_ORDER {
            let hc = ngram_counts(&h, n);
            let rc = ngram_counts(&r, n);
            s.totals[n - 1] = h.len().saturating_sub(n - 1);
            s.matches[n - 1] = hc
                .iter()
                .map(|(g, c)| (*c).min(rc.get(g).copied().unwrap_or(0)))
                .sum();
        }
        s
    }

    fn add(&mut self, o: &Stats) {
        for n in 0..MAX_ORDER {
            self.matches[n] += o.matches[n];
            self.totals[n] += o.totals[n];
        }
        self.hyp_len += o.hyp_len;
        self.ref_len += o.ref_len;
    }

    fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches.contains(&0) {
            return 0.0;
        }
        let log_prec: f64 = (0..MAX_ORDER)
            .map(|n| libm::log(self.matches[n] as f64 / self.totals[n] as f64))
            .sum::<f64>()
            / MAX_ORDER as f64;
        let bp = f64::min(0.0, 1.0 - self.ref_len as f64 / self.hyp_len as f64);
        100.0 * libm::exp(log_prec + bp)
    }
}

/// Unsmoothed BLEU of one tokenized sentence pair.
pub fn sentence_bleu(hyp: &str, reference: &str) -> f64 {
    Stats::of(hyp, reference).score()
}

/// Corpus BLEU-4 over whitespace tokens: geometric mean of clipped n-gram
/// precisions times `exp(min(0, 1 - ref_len / hyp_len))`; 0 when any
/// precision is 0.
pub fn bleu<H: AsRef<str>, R: AsRef<str>>(hyps: &[H], refs: &[R]) -> Result<ScoreReport> {
    check_lengths(hyps, refs)?;
    let mut total = Stats::default();
    let mut per = Vec::with_capacity(hyps.len());
    for (h, r) in hyps.iter().zip(refs) {
        let s = Stats::of(h.as_ref(), r.as_ref());
        per.push(s.score());
        total.add(&s);
    }
    Ok(ScoreReport {
        metric: "bleu".to_string(),
        score: total.score(),
        sentences: hyps.len(),
        per_sentence: Some(per),
    })
}
