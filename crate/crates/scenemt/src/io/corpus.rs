use std::collections::BTreeSet;
use std::collections::HashMap;
use std::fs;
use std::path::Path;

use scenemt_core::model::{BOS, EOS};
use scenemt_core::{Error, Result as CoreResult};

use crate::error::{CliError, Result};

pub const EOS_TOKEN: &str = "</s>";
pub const BOS_TOKEN: &str = "<s>";

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Lines of a one-sentence-per-line file, without line terminators.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?.lines().map(str::to_string).collect())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Token inventory with the two specials at their reserved ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    fn from_tokens(tokens: Vec<String>) -> CoreResult<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("duplicate token `{t}`"),
                });
            }
        }
        Ok(Vocab { tokens, index })
    }

    /// Specials first, then every whitespace token of `lines` in sorted
    /// order.
    pub fn build<'a>(lines: impl IntoIterator<Item = &'a str>) -> Self {
        let words: BTreeSet<&str> = lines.into_iter().flat_map(str::split_whitespace).collect();
        let mut tokens = vec![String::new(); 2];
        tokens[EOS] = EOS_TOKEN.to_string();
        tokens[BOS] = BOS_TOKEN.to_string();
        tokens.extend(
            words
                .into_iter()
                .filter(|w| *w != EOS_TOKEN && *w != BOS_TOKEN)
                .map(str::to_string),
        );
        Vocab::from_tokens(tokens).expect("sorted set has no duplicates")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// `line` is 1-based and only used in the error.
    pub fn encode(&self, sentence: &str, line: usize) -> CoreResult<Vec<usize>> {
        sentence
            .split_whitespace()
            .map(|w| {
                self.index.get(w).copied().ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("token `{w}` is not in the vocabulary"),
                })
            })
            .collect()
    }

    pub fn decode(&self, ids: &[usize]) -> String {
        ids.iter()
            .map(|&i| self.tokens.get(i).map_or("<?>", String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// One token per line, in id order.
    pub fn to_text(&self) -> String {
        self.tokens.iter().map(|t| format!("{t}\n")).collect()
    }

    pub fn parse(text: &str) -> CoreResult<Self> {
        let tokens: Vec<String> = text.lines().map(str::to_string).collect();
        if tokens.len() < 2 || tokens[EOS] != EOS_TOKEN || tokens[BOS] != BOS_TOKEN {
            return Err(Error::Parse {
                line: 1,
                msg: format!("vocabulary must start with {EOS_TOKEN} and {BOS_TOKEN}"),
            });
        }
        if let Some(i) = tokens
            .iter()
            .position(|t| t.is_empty() || t.contains(char::is_whitespace))
        {
            return Err(Error::Parse {
                line: i + 1,
                msg: "empty or whitespace-bearing token".into(),
            });
        }
        Vocab::from_tokens(tokens)
    }
}
