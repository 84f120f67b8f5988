use scenemt_core::eval::ScoreReport;
use scenemt_core::{Error, Result};

/// One parsed score: the metric name and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreLine {
    pub metric: String,
    pub score: f64,
}

/// `index<TAB>score` lines, 1-based.
pub fn format_per_sentence(report: &ScoreReport) -> String {
    report
        .per_sentence
        .iter()
        .flatten()
        .enumerate()
        .map(|(i, s)| format!("{}\t{s:.4}\n", i + 1))
        .collect()
}

/// Reads report lines (`metric=<m> score=<x> ...`), bare numbers, or
/// tab-separated lines whose last field is the score. Bare and tabular
/// lines get the metric name `score`.
pub fn parse_score_file(text: &str) -> Result<Vec<ScoreLine>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(format!("`{s}` is not a number")))
        };
        if line.contains('=') {
            let mut metric = None;
            let mut score = None;
            for field in line.split_whitespace() {
                match field.split_once('=') {
                    Some(("metric", v)) => metric = Some(v.to_string()),
                    Some(("score", v)) => score = Some(num(v)?),
                    Some(_) => {}
                    None => return Err(err(format!("`{field}` is not key=value"))),
                }
            }
            match (metric, score) {
                (Some(metric), Some(score)) => out.push(ScoreLine { metric, score }),
                _ => return Err(err("report line needs metric= and score=".into())),
            }
        } else {
            let last = line.split('\t').next_back().unwrap_or(line).trim();
            out.push(ScoreLine {
                metric: "score".into(),
                score: num(last)?,
            });
        }
    }
    Ok(out)
}
