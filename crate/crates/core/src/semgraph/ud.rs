use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::DistMatrix;
use crate::error::{parse_err, Error, Result};

/// A dependency tree over the words of one sentence. `heads[i]` is the
/// 0-based parent of word `i`, `None` for the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UdGraph {
    forms: Vec<String>,
    heads: Vec<Option<usize>>,
    deprels: Vec<String>,
}

impl UdGraph {
    pub fn new(
        forms: Vec<String>,
        heads: Vec<Option<usize>>,
        deprels: Vec<String>,
    ) -> Result<Self> {
        let n = heads.len();
        if forms.len() != n || deprels.len() != n {
            return Err(Error::Dimension(format!(
                "{} forms, {} heads, {} relations",
                forms.len(),
                n,
                deprels.len()
            )));
        }
        if let Some((i, h)) = heads
            .iter()
            .enumerate()
            .find_map(|(i, h)| h.filter(|&h| h >= n).map(|h| (i, h)))
        {
            return Err(Error::Structural(format!(
                "word {i} has head {h} outside the sentence"
            )));
        }
        let roots = heads.iter().filter(|h| h.is_none()).count();
        if roots != 1 {
            return Err(Error::Structural(format!(
                "expected exactly one root, found {roots}"
            )));
        }
        // Every word must reach the root within n steps.
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(h) = heads[cur] {
                cur = h;
                steps += 1;
                if steps > n {
                    return Err(Error::Structural(format!("cycle through word {start}")));
                }
            }
        }
        Ok(UdGraph {
            forms,
            heads,
            deprels,
        })
    }

    /// Unlabelled tree from parent indices; words are named `w0`, `w1`, ...
    pub fn from_heads(heads: Vec<Option<usize>>) -> Result<Self> {
        let n = heads.len();
        let forms = (0..n).map(|i| format!("w{i}")).collect();
        UdGraph::new(forms, heads, vec!["dep".to_string(); n])
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn heads(&self) -> &[Option<usize>] {
        &self.heads
    }

    pub fn deprels(&self) -> &[String] {
        &self.deprels
    }

    pub fn forms(&self) -> &[String] {
        &self.forms
    }

    pub fn root(&self) -> usize {
        self.heads
            .iter()
            .position(Option::is_none)
            .expect("validated tree has a root")
    }

    /// Hop distances between all word pairs, treating arcs as undirected.
    pub fn distances(&self) -> DistMatrix {
        let n = self.len();
        let mut adjacency = vec![Vec::new(); n];
        for (child, head) in self.heads.iter().enumerate() {
            if let Some(h) = *head {
                adjacency[child].push(h);
                adjacency[h].push(child);
            }
        }
        let mut out = DistMatrix::filled(n, DistMatrix::INF);
        let mut queue = VecDeque::new();
        for src in 0..n {
            out.set(src, src, 0);
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                let du = out.raw(src, u);
                for &v in &adjacency[u] {
                    if out.raw(src, v) == DistMatrix::INF {
                        out.set(src, v, du + 1);
                        queue.push_back(v);
                    }
                }
            }
        }
        out
    }
}

/// Reads CoNLL-U: blank-line separated sentences, `#` comments ignored,
/// multiword ranges (`1-2`) and empty nodes (`1.1`) skipped. Only ID, FORM,
/// HEAD and DEPREL are consumed.
pub fn parse_conllu(text: &str) -> Result<Vec<UdGraph>> {
    let mut out = Vec::new();
    let mut rows: Vec<(usize, String, usize, String)> = Vec::new();
    let mut first_line = 0;

    let mut flush =
        |rows: &mut Vec<(usize, String, usize, String)>, first_line: usize| -> Result<()> {
            if rows.is_empty() {
                return Ok(());
            }
            let n = rows.len();
            let mut forms = Vec::with_capacity(n);
            let mut heads = Vec::with_capacity(n);
            let mut rels = Vec::with_capacity(n);
            for (line_no, form, head, rel) in rows.drain(..) {
                if head > n {
                    return Err(parse_err(
                        line_no,
                        format!("head {head} out of range for {n} words"),
                    ));
                }
                forms.push(form);
                heads.push(head.checked_sub(1));
                rels.push(rel);
            }
            out.push(UdGraph::new(forms, heads, rels).map_err(|e| match e {
                Error::Structural(m) => {
                    Error::Structural(format!("sentence starting at line {first_line}: {m}"))
                }
                other => other,
            })?);
            Ok(())
        };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut rows, first_line)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = if line.contains('\t') {
            line.split('\t').collect()
        } else {
            line.split_whitespace().collect()
        };
        if cols.len() != 10 {
            return Err(parse_err(
                line_no,
                format!("expected 10 columns, found {}", cols.len()),
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad word id `{}`", cols[0])))?;
        if rows.is_empty() {
            first_line = line_no;
        }
        if id != rows.len() + 1 {
            return Err(parse_err(line_no, format!("word id {id} out of sequence")));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad head `{}`", cols[6])))?;
        rows.push((line_no, cols[1].to_string(), head, cols[7].to_string()));
    }
    flush(&mut rows, first_line)?;
    Ok(out)
}

/// Writes sentences back as CoNLL-U, `_` in the columns that are not kept.
pub fn serialize_conllu(graphs: &[UdGraph]) -> String {
    let mut out = String::new();
    for g in graphs {
        for i in 0..g.len() {
            let head = g.heads[i].map_or(0, |h| h + 1);
            out.push_str(&format!(
                "{}\t{}\t_\t_\t_\t_\t{}\t{}\t_\t_\n",
                i + 1,
                g.forms[i],
                head,
                g.deprels[i]
            ));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_token_sentence() {
        let text = "# text = Hi there\n1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n2\tthere\tthere\tADV\t_\t_\t1\tadvmod\t_\t_\n";
        let gs = parse_conllu(text).unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].len(), 2);
        assert_eq!(gs[0].heads(), [None, Some(0)]);
        assert_eq!(gs[0].deprels()[1], "advmod");
    }

    #[test]
    fn blocks_and_multiword_ranges() {
        let text = "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n\n\n\
                    1-2\tdu\t_\t_\t_\t_\t_\t_\t_\t_\n\
                    1\tde\t_\t_\t_\t_\t2\tcase\t_\t_\n\
                    2\tle\t_\t_\t_\t_\t0\troot\t_\t_\n\
                    2.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n";
        let gs = parse_conllu(text).unwrap();
        assert_eq!(gs.len(), 2);
        assert_eq!(gs[1].heads(), [Some(1), None]);
    }

    #[test]
    fn head_out_of_range() {
        let text = "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n2\tb\t_\t_\t_\t_\t7\tdep\t_\t_\n";
        assert!(matches!(
            parse_conllu(text),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn root_count() {
        let two = "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n2\tb\t_\t_\t_\t_\t0\troot\t_\t_\n";
        assert!(matches!(parse_conllu(two), Err(Error::Structural(_))));
        let none = "1\ta\t_\t_\t_\t_\t2\tdep\t_\t_\n2\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n";
        assert!(matches!(parse_conllu(none), Err(Error::Structural(_))));
    }

    #[test]
    fn cycle_with_a_root_elsewhere() {
        assert!(UdGraph::from_heads(vec![None, Some(2), Some(1)]).is_err());
    }

    #[test]
    fn chain_distances() {
        let g = UdGraph::from_heads(vec![None, Some(0), Some(1), Some(0)]).unwrap();
        let d = g.distances();
        assert_eq!(d.get(2, 3), Some(3));
        assert_eq!(d.get(3, 2), Some(3));
        assert_eq!(d.get(1, 1), Some(0));
    }
}
