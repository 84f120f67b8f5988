use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{parse_err, Result};

/// Marker appended to the last symbol of every word.
pub const END_OF_WORD: &str = "</w>";

/// Ordered merge list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
}

impl BpeModel {
    pub fn new(merges: Vec<(String, String)>) -> Self {
        BpeModel { merges }
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    /// The model restricted to its first `n` merges.
    pub fn truncated(&self, n: usize) -> BpeModel {
        BpeModel {
            merges: self.merges[..n.min(self.merges.len())].to_vec(),
        }
    }

    /// Every symbol the model can emit beyond single characters.
    pub fn vocabulary(&self) -> Vec<String> {
        self.merges.iter().map(|(l, r)| format!("{l}{r}")).collect()
    }

    /// One merge per line, `left right`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (l, r) in &self.merges {
            out.push_str(l);
            out.push(' ');
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut merges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("#version") {
                continue;
            }
            let mut it = line.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(l), Some(r), None) => merges.push((l.to_string(), r.to_string())),
                _ => return Err(parse_err(i + 1, "expected `left right`")),
            }
        }
        Ok(BpeModel { merges })
    }
}

fn initial_symbols(word: &str) -> Vec<String> {
    let mut symbols: Vec<String> = word.chars().map(|c| c.to_string()).collect();
    match symbols.last_mut() {
        Some(last) => last.push_str(END_OF_WORD),
        None => symbols.push(END_OF_WORD.to_string()),
    }
    symbols
}

fn merge_pair(symbols: &mut Vec<String>, left: &str, right: &str) {
    let mut i = 0;
    while i + 1 < symbols.len() {
        if symbols[i] == left && symbols[i + 1] == right {
            let r = symbols.remove(i + 1);
            symbols[i].push_str(&r);
        }
        i += 1;
    }
}

/// Learns up to `merges` merges from whitespace-separated `corpus` words.
/// Each round merges the most frequent adjacent pair; ties go to the
/// lexicographically smallest pair. Stops early when no pair is left.
pub fn train_bpe<'a, I>(corpus: I, merges: usize) -> BpeModel
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for line in corpus {
        for w in line.split_whitespace() {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    let mut words: Vec<(Vec<String>, usize)> = counts
        .into_iter()
        .map(|(w, c)| (initial_symbols(w), c))
        .collect();

    let mut learned = Vec::new();
    while learned.len() < merges {
        let mut pairs: BTreeMap<(&str, &str), usize> = BTreeMap::new();
        for (symbols, c) in &words {
            for win in symbols.windows(2) {
                *pairs.entry((win[0].as_str(), win[1].as_str())).or_insert(0) += c;
            }
        }
        // BTreeMap iterates in ascending key order, so the first maximum
        // is the lexicographically smallest
        let mut best: Option<((&str, &str), usize)> = None;
        for (pair, c) in pairs {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((pair, c));
            }
        }
        let Some(((l, r), _)) = best else { break };
        let (l, r) = (l.to_string(), r.to_string());
        for (symbols, _) in &mut words {
            merge_pair(symbols, &l, &r);
        }
        learned.push((l, r));
    }
    BpeModel { merges: learned }
}

/// Segments one word by replaying the merges in order. The last subword
/// carries [`END_OF_WORD`].
pub fn apply_bpe(model: &BpeModel, word: &str) -> Vec<String> {
    let mut symbols = initial_symbols(word);
    for (l, r) in &model.merges {
        if symbols.len() < 2 {
            break;
        }
        merge_pair(&mut symbols, l, r);
    }
    symbols
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_merges_gives_characters() {
        let m = train_bpe(["low low lower"], 0);
        assert_eq!(apply_bpe(&m, "low"), ["l", "o", "w</w>"]);
    }

    #[test]
    fn low_becomes_one_unit() {
        let m = train_bpe(["low low lower"], 10);
        assert_eq!(m.merges()[0], ("l".to_string(), "o".to_string()));
        assert_eq!(m.merges()[1], ("lo".to_string(), "w</w>".to_string()));
        assert_eq!(apply_bpe(&m, "low"), ["low</w>"]);
        assert_eq!(
            apply_bpe(&m.truncated(1), "lower"),
            ["lo", "w", "e", "r</w>"]
        );
    }

    #[test]
    fn stops_when_no_pairs_remain() {
        let m = train_bpe(["a"], 5);
        assert!(m.merges().is_empty());
    }

    #[test]
    fn model_file_round_trip() {
        let m = train_bpe(["low low lower newest widest"], 6);
        assert_eq!(BpeModel::parse(&m.to_text()).unwrap(), m);
        assert!(BpeModel::parse("a b c\n").is_err());
        assert_eq!(
            BpeModel::parse("#version: 0.2\na b\n")
                .unwrap()
                .merges()
                .len(),
            1
        );
        assert_eq!(BpeModel::new(vec![]).vocabulary().len(), 0);
    }
}
