use alloc::string::String;
use alloc::vec::Vec;

/// A tokenized sentence pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelPair {
    pub src: Vec<String>,
    pub trg: Vec<String>,
    pub meta: Option<String>,
}

impl ParallelPair {
    pub fn new(src: Vec<String>, trg: Vec<String>) -> Self {
        ParallelPair {
            src,
            trg,
            meta: None,
        }
    }

    /// Splits both sides on whitespace.
    pub fn from_lines(src: &str, trg: &str) -> Self {
        let split = |s: &str| s.split_whitespace().map(String::from).collect();
        ParallelPair::new(split(src), split(trg))
    }
}

/// Extra keep/drop predicate (language id, alignment score, ...).
pub trait PairFilter {
    fn keep(&self, pair: &ParallelPair) -> bool;
}

impl<F: Fn(&ParallelPair) -> bool> PairFilter for F {
    fn keep(&self, pair: &ParallelPair) -> bool {
        self(pair)
    }
}

/// Rewrites a pair before filtering (unescaping, truecasing, ...).
pub trait PairTransform {
    fn apply(&self, pair: ParallelPair) -> ParallelPair;
}

impl<F: Fn(ParallelPair) -> ParallelPair> PairTransform for F {
    fn apply(&self, pair: ParallelPair) -> ParallelPair {
        self(pair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub max_len: usize,
    pub max_ratio: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            max_len: 100,
            max_ratio: 1.5,
        }
    }
}

impl FilterConfig {
    /// The built-in numeric rules: both sides non-empty, neither longer
    /// than `max_len`, and `max(|s|, |t|) / min(|s|, |t|)` at most
    /// `max_ratio`. Boundary values are kept.
    pub fn accepts(&self, pair: &ParallelPair) -> bool {
        let (s, t) = (pair.src.len(), pair.trg.len());
        if s == 0 || t == 0 || s > self.max_len || t > self.max_len {
            return false;
        }
        let (long, short) = if s >= t { (s, t) } else { (t, s) };
        // compare long/short <= ratio without dividing
        (long as f64) <= self.max_ratio * short as f64
    }
}

/// Applies `transforms` in order, then the numeric rules, then `extra`
/// predicates. Output order follows input order.
pub fn filter_corpus(
    pairs: Vec<ParallelPair>,
    cfg: &FilterConfig,
    transforms: &[&dyn PairTransform],
    extra: &[&dyn PairFilter],
) -> Vec<ParallelPair> {
    pairs
        .into_iter()
        .map(|p| transforms.iter().fold(p, |p, t| t.apply(p)))
        .filter(|p| cfg.accepts(p) && extra.iter().all(|f| f.keep(p)))
        .collect()
}
