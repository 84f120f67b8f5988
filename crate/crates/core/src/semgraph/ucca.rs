use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{header_blocks, parse_len_header};
use crate::error::{parse_err, Error, Result};

/// A category-labelled edge between two nodes (indices into
/// [`UccaGraph::node_ids`]). Remote edges mark shared participants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub parent: usize,
    pub child: usize,
    pub category: String,
    pub remote: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Terminal {
    pub node: usize,
    pub token: usize,
    pub surface: String,
}

/// A validated UCCA graph: a rooted DAG (over non-remote edges) whose
/// terminals are aligned one-to-one with the sentence tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UccaGraph {
    node_ids: Vec<String>,
    edges: Vec<Edge>,
    /// Sorted by token index, so `terminals[i].token == i`.
    terminals: Vec<Terminal>,
    root: usize,
}

impl UccaGraph {
    /// Builds and validates a graph from string-keyed parts.
    ///
    /// The node set is every terminal id, the root, and every edge parent;
    /// an edge whose child is none of those is rejected as undeclared.
    pub fn from_parts<'a>(
        len: usize,
        terminals: &[(&'a str, usize, &'a str)],
        edges: &[(&'a str, &'a str, &'a str, bool)],
        root: &'a str,
    ) -> Result<Self> {
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        let mut node_ids: Vec<String> = Vec::new();
        let mut intern = |id: &'a str| -> usize {
            *index.entry(id).or_insert_with(|| {
                node_ids.push(id.to_string());
                node_ids.len() - 1
            })
        };

        let mut terminal_ids = BTreeMap::new();
        for &(id, _, _) in terminals {
            if terminal_ids.insert(id, ()).is_some() {
                return Err(Error::Structural(format!(
                    "terminal node `{id}` declared twice"
                )));
            }
            intern(id);
        }
        let root_idx = intern(root);
        for &(parent, _, _, _) in edges {
            intern(parent);
        }

        let mut out_edges = Vec::with_capacity(edges.len());
        for &(parent, child, category, remote) in edges {
            let child_idx = *index.get(child).ok_or_else(|| {
                Error::Structural(format!("edge references undeclared node `{child}`"))
            })?;
            if category.is_empty() {
                return Err(Error::Structural(format!(
                    "edge {parent} -> {child} has no category"
                )));
            }
            out_edges.push(Edge {
                parent: index[parent],
                child: child_idx,
                category: category.to_string(),
                remote,
            });
        }

        let mut slots: Vec<Option<Terminal>> = vec![None; len];
        for &(id, token, surface) in terminals {
            let slot = slots.get_mut(token).ok_or_else(|| {
                Error::Structural(format!("token index {token} out of range for length {len}"))
            })?;
            if slot.is_some() {
                return Err(Error::Structural(format!("duplicate token index {token}")));
            }
            *slot = Some(Terminal {
                node: index[id],
                token,
                surface: surface.to_string(),
            });
        }
        let mut terms = Vec::with_capacity(len);
        for (i, slot) in slots.into_iter().enumerate() {
            terms.push(
                slot.ok_or_else(|| Error::Structural(format!("token index {i} has no terminal")))?,
            );
        }

        let graph = UccaGraph {
            node_ids,
            edges: out_edges,
            terminals: terms,
            root: root_idx,
        };
        graph.check_acyclic()?;
        graph.check_rooted()?;
        Ok(graph)
    }

    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn terminals(&self) -> &[Terminal] {
        &self.terminals
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.terminals.iter().map(|t| t.surface.as_str()).collect()
    }

    /// Outgoing edges per node, in input order.
    pub fn children(&self) -> Vec<Vec<&Edge>> {
        let mut out = vec![Vec::new(); self.node_ids.len()];
        for e in &self.edges {
            out[e.parent].push(e);
        }
        out
    }

    /// Token index carried by each node, if it is a terminal.
    pub fn terminal_token(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.node_ids.len()];
        for t in &self.terminals {
            out[t.node] = Some(t.token);
        }
        out
    }

    fn check_acyclic(&self) -> Result<()> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let children = self.children();
        let mut state = vec![0u8; self.node_ids.len()];
        for start in 0..self.node_ids.len() {
            if state[start] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            state[start] = 1;
            while let Some((node, next)) = stack.pop() {
                let kids: Vec<usize> = children[node]
                    .iter()
                    .filter(|e| !e.remote)
                    .map(|e| e.child)
                    .collect();
                if next < kids.len() {
                    stack.push((node, next + 1));
                    let child = kids[next];
                    match state[child] {
                        0 => {
                            state[child] = 1;
                            stack.push((child, 0));
                        }
                        1 => {
                            return Err(Error::Structural(format!(
                                "cycle through node `{}`",
                                self.node_ids[child]
                            )))
                        }
                        _ => {}
                    }
                } else {
                    state[node] = 2;
                }
            }
        }
        Ok(())
    }

    fn check_rooted(&self) -> Result<()> {
        let children = self.children();
        let mut seen = vec![false; self.node_ids.len()];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        while let Some(n) = stack.pop() {
            for e in &children[n] {
                if !seen[e.child] {
                    seen[e.child] = true;
                    stack.push(e.child);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(Error::Structural(format!(
                "node `{}` is not reachable from the root",
                self.node_ids[i]
            ))),
            None => Ok(()),
        }
    }

    /// Writes the graph back in the line-oriented graph file format.
    pub fn to_text(&self) -> String {
        let mut out = format!("#L {}\n", self.len());
        for t in &self.terminals {
            out.push_str(&format!(
                "T {} {} {}\n",
                self.node_ids[t.node], t.token, t.surface
            ));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "E {} {} {}{}\n",
                self.node_ids[e.parent],
                self.node_ids[e.child],
                e.category,
                if e.remote { " R" } else { "" }
            ));
        }
        out.push_str(&format!("ROOT {}\n", self.node_ids[self.root]));
        out
    }
}

/// Parses a file holding exactly one graph.
pub fn parse_ucca(text: &str) -> Result<UccaGraph> {
    let mut graphs = parse_ucca_many(text)?;
    match graphs.len() {
        1 => Ok(graphs.pop().unwrap()),
        0 => Err(parse_err(1, "no `#L` header found")),
        n => Err(Error::Contract(format!("expected one graph, found {n}"))),
    }
}

/// Parses a file holding one graph per sentence, each starting at `#L`.
pub fn parse_ucca_many(text: &str) -> Result<Vec<UccaGraph>> {
    header_blocks(text)?
        .into_iter()
        .map(|block| parse_block(&block))
        .collect()
}

fn parse_block(block: &[(usize, &str)]) -> Result<UccaGraph> {
    let (head_line, head) = block[0];
    let len = parse_len_header(head_line, head)?;
    let mut terminals: Vec<(&str, usize, &str)> = Vec::new();
    let mut edges: Vec<(&str, &str, &str, bool)> = Vec::new();
    let mut root: Option<&str> = None;

    for &(line_no, line) in &block[1..] {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "T" => {
                if fields.len() != 4 {
                    return Err(parse_err(
                        line_no,
                        "expected `T <node-id> <token-index> <surface>`",
                    ));
                }
                let token = fields[2]
                    .parse::<usize>()
                    .map_err(|_| parse_err(line_no, "token index is not a non-negative integer"))?;
                terminals.push((fields[1], token, fields[3]));
            }
            "E" => {
                let remote = match fields.len() {
                    4 => false,
                    5 if fields[4] == "R" => true,
                    _ => {
                        return Err(parse_err(
                            line_no,
                            "expected `E <parent-id> <child-id> <category> [R]`",
                        ))
                    }
                };
                edges.push((fields[1], fields[2], fields[3], remote));
            }
            "ROOT" => {
                if fields.len() != 2 {
                    return Err(parse_err(line_no, "expected `ROOT <node-id>`"));
                }
                if root.is_some() {
                    return Err(parse_err(line_no, "second ROOT line"));
                }
                root = Some(fields[1]);
            }
            other => return Err(parse_err(line_no, format!("unknown record type `{other}`"))),
        }
    }
    let root = root.ok_or_else(|| parse_err(head_line, "graph has no ROOT line"))?;
    UccaGraph::from_parts(len, &terminals, &edges, root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_token_graph() {
        let g = parse_ucca("#L 1\nT t0 0 Hello\nE r t0 P\nROOT r\n").unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.tokens(), ["Hello"]);
    }

    #[test]
    fn root_may_be_the_terminal() {
        let g = parse_ucca("#L 1\nT t0 0 Hi\nROOT t0\n").unwrap();
        assert_eq!(g.terminals().len(), 1);
    }

    #[test]
    fn undeclared_node_is_structural() {
        let err = parse_ucca("#L 1\nT t0 0 a\nE r t0 P\nE r ghost A\nROOT r\n").unwrap_err();
        assert!(
            matches!(err, Error::Structural(ref m) if m.contains("ghost")),
            "{err:?}"
        );
    }

    #[test]
    fn cycle_is_structural() {
        let text = "#L 1\nT t0 0 a\nE r x H\nE x y H\nE y x H\nE y t0 P\nROOT r\n";
        assert!(matches!(parse_ucca(text), Err(Error::Structural(m)) if m.contains("cycle")));
    }

    #[test]
    fn remote_edges_may_close_a_cycle() {
        let text = "#L 1\nT t0 0 a\nE r x H\nE x t0 P\nE x r A R\nROOT r\n";
        assert!(parse_ucca(text).is_ok());
    }

    #[test]
    fn duplicate_token_index() {
        let text = "#L 2\nT a 0 x\nT b 0 y\nE r a A\nE r b A\nROOT r\n";
        assert!(matches!(parse_ucca(text), Err(Error::Structural(m)) if m.contains("duplicate")));
    }

    #[test]
    fn missing_token_index() {
        let text = "#L 2\nT a 0 x\nE r a A\nROOT r\n";
        assert!(matches!(parse_ucca(text), Err(Error::Structural(_))));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "#L 1\nT a 0 x\nE r\nROOT r\n";
        assert_eq!(
            parse_ucca(text).unwrap_err(),
            parse_err(3, "expected `E <parent-id> <child-id> <category> [R]`")
        );
        let text = "#L 1\nT a zero x\n";
        assert!(matches!(
            parse_ucca(text),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn unreachable_node() {
        let text = "#L 2\nT a 0 x\nT b 1 y\nE r a A\nROOT r\n";
        assert!(matches!(parse_ucca(text), Err(Error::Structural(m)) if m.contains("reachable")));
    }

    #[test]
    fn many_graphs_and_round_trip() {
        let text = "#L 1\nT a 0 x\nROOT a\n\n#L 2\nT a 0 x\nT b 1 y\nE r a A\nE r b P\nROOT r\n";
        let gs = parse_ucca_many(text).unwrap();
        assert_eq!(gs.len(), 2);
        let again = parse_ucca(&gs[1].to_text()).unwrap();
        assert_eq!(again, gs[1]);
    }
}
