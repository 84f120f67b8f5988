use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{header_blocks, parse_len_header, UccaGraph};
use crate::error::{parse_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    Process,
    State,
}

impl RelationKind {
    pub fn from_category(cat: &str) -> Option<Self> {
        match cat {
            "P" => Some(RelationKind::Process),
            "S" => Some(RelationKind::State),
            _ => None,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            RelationKind::Process => "P",
            RelationKind::State => "S",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MainRelation {
    pub kind: RelationKind,
    pub tokens: Vec<usize>,
}

/// One scene: a sorted token set with exactly one main relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scene {
    pub id: usize,
    pub tokens: Vec<usize>,
    pub main: MainRelation,
    pub participants: Vec<Vec<usize>>,
}

impl Scene {
    pub fn contains(&self, token: usize) -> bool {
        self.tokens.binary_search(&token).is_ok()
    }
}

/// The scenes of one sentence plus the tokens that belong to none of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneCover {
    len: usize,
    scenes: Vec<Scene>,
    unassigned: Vec<usize>,
}

impl SceneCover {
    /// Validates `scenes` against a sentence of `len` tokens and derives the
    /// unassigned set. Token lists are sorted and deduplicated; scene ids are
    /// reassigned to list positions.
    pub fn new(len: usize, scenes: Vec<Scene>) -> Result<Self> {
        let mut covered = vec![false; len];
        let mut out = Vec::with_capacity(scenes.len());
        for (id, mut scene) in scenes.into_iter().enumerate() {
            normalize(&mut scene.tokens);
            normalize(&mut scene.main.tokens);
            scene.participants.iter_mut().for_each(normalize);
            if let Some(&t) = scene.tokens.iter().find(|&&t| t >= len) {
                return Err(Error::Structural(format!(
                    "scene {id}: token {t} out of range for length {len}"
                )));
            }
            let inside = |set: &[usize]| set.iter().all(|t| scene.tokens.binary_search(t).is_ok());
            if !inside(&scene.main.tokens) {
                return Err(Error::Structural(format!(
                    "scene {id}: main relation not inside the scene"
                )));
            }
            if !scene.participants.iter().all(|p| inside(p)) {
                return Err(Error::Structural(format!(
                    "scene {id}: participant not inside the scene"
                )));
            }
            for &t in &scene.tokens {
                covered[t] = true;
            }
            scene.id = id;
            out.push(scene);
        }
        let unassigned = (0..len).filter(|&t| !covered[t]).collect();
        Ok(SceneCover {
            len,
            scenes: out,
            unassigned,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn scenes(&self) -> &[Scene] {
        &self.scenes
    }

    pub fn unassigned(&self) -> &[usize] {
        &self.unassigned
    }

    pub fn is_assigned(&self, token: usize) -> bool {
        self.unassigned.binary_search(&token).is_err()
    }

    /// Indices of the scenes containing each token.
    pub fn membership(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len];
        for (s, scene) in self.scenes.iter().enumerate() {
            for &t in &scene.tokens {
                out[t].push(s);
            }
        }
        out
    }

    /// True when some scene holds both tokens.
    pub fn share_scene(&self, a: usize, b: usize) -> bool {
        self.scenes.iter().any(|s| s.contains(a) && s.contains(b))
    }

    /// Serializes to the scene-cover shortcut format. The main relation is
    /// written as its covering span.
    pub fn to_text(&self) -> String {
        let mut out = format!("#L {}\n", self.len);
        for s in &self.scenes {
            let main = match (s.main.tokens.first(), s.main.tokens.last()) {
                (Some(a), Some(b)) if a == b => format!("{a}"),
                (Some(a), Some(b)) => format!("{a}-{b}"),
                _ => String::new(),
            };
            let toks: Vec<String> = s.tokens.iter().map(|t| format!("{t}")).collect();
            out.push_str(&format!(
                "S {} main={} tokens={}\n",
                s.main.kind.code(),
                main,
                toks.join(",")
            ));
        }
        out
    }
}

fn normalize(v: &mut Vec<usize>) {
    v.sort_unstable();
    v.dedup();
}

/// Reduces a UCCA graph to its scenes.
///
/// Every node with an outgoing P or S edge heads a scene. A scene's tokens
/// are the terminals reachable from its node, following remote edges, but
/// without entering nodes that head a scene of their own. Scenes are
/// ordered by their first token.
pub fn extract_scenes(g: &UccaGraph) -> Result<SceneCover> {
    let children = g.children();
    let term = g.terminal_token();
    let n = g.node_count();

    let mut main_edge: Vec<Option<(usize, RelationKind)>> = vec![None; n];
    for e in g.edges() {
        if let Some(kind) = RelationKind::from_category(&e.category) {
            if main_edge[e.parent].is_some() {
                return Err(Error::Structural(format!(
                    "node `{}` has more than one main relation",
                    g.node_ids()[e.parent]
                )));
            }
            main_edge[e.parent] = Some((e.child, kind));
        }
    }
    let is_scene: Vec<bool> = main_edge.iter().map(Option::is_some).collect();

    let collect = |start: usize| -> Vec<usize> {
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        let mut tokens = Vec::new();
        seen[start] = true;
        while let Some(node) = stack.pop() {
            if let Some(t) = term[node] {
                tokens.push(t);
            }
            for e in &children[node] {
                if !seen[e.child] && !is_scene[e.child] {
                    seen[e.child] = true;
                    stack.push(e.child);
                }
            }
        }
        normalize(&mut tokens);
        tokens
    };

    let mut scenes = Vec::new();
    for node in 0..n {
        let Some((main_child, kind)) = main_edge[node] else {
            continue;
        };
        let tokens = collect(node);
        if tokens.is_empty() {
            continue;
        }
        let main_tokens = if is_scene[main_child] {
            Vec::new()
        } else {
            collect(main_child)
        };
        let participants = children[node]
            .iter()
            .filter(|e| e.category == "A" && !is_scene[e.child])
            .map(|e| collect(e.child))
            .filter(|p| !p.is_empty())
            .collect();
        scenes.push(Scene {
            id: 0,
            tokens,
            main: MainRelation {
                kind,
                tokens: main_tokens,
            },
            participants,
        });
    }
    scenes.sort_by(|a, b| a.tokens.cmp(&b.tokens));
    SceneCover::new(g.len(), scenes)
}

/// Parses a file holding exactly one scene cover.
pub fn parse_scene_cover(text: &str) -> Result<SceneCover> {
    let mut covers = parse_scene_covers(text)?;
    match covers.len() {
        1 => Ok(covers.pop().unwrap()),
        0 => Err(parse_err(1, "no `#L` header found")),
        n => Err(Error::Contract(format!("expected one cover, found {n}"))),
    }
}

/// Parses the scene-cover shortcut format, one cover per `#L` block:
///
/// ```text
/// #L 7
/// S P main=1 tokens=0,1,2,3
/// S P main=5 tokens=3,5
/// ```
pub fn parse_scene_covers(text: &str) -> Result<Vec<SceneCover>> {
    let mut covers = Vec::new();
    for block in header_blocks(text)? {
        let (head_line, head) = block[0];
        let len = parse_len_header(head_line, head)?;
        let mut scenes = Vec::new();
        for &(line_no, line) in &block[1..] {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            scenes.push(parse_scene_line(line_no, line, len)?);
        }
        covers.push(SceneCover::new(len, scenes).map_err(|e| match e {
            Error::Structural(m) => parse_err(head_line, m),
            other => other,
        })?);
    }
    Ok(covers)
}

fn parse_scene_line(line_no: usize, line: &str, len: usize) -> Result<Scene> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let bad = || parse_err(line_no, "expected `S <P|S> main=<i-j|i> tokens=<i,j,...>`");
    if fields.len() != 4 || fields[0] != "S" {
        return Err(bad());
    }
    let kind = RelationKind::from_category(fields[1]).ok_or_else(bad)?;
    let index = |s: &str| -> Result<usize> {
        let t = s
            .parse::<usize>()
            .map_err(|_| parse_err(line_no, format!("bad token index `{s}`")))?;
        if t >= len {
            return Err(parse_err(
                line_no,
                format!("token index {t} out of range for length {len}"),
            ));
        }
        Ok(t)
    };
    let main_spec = fields[2].strip_prefix("main=").ok_or_else(bad)?;
    let main: Vec<usize> = match main_spec.split_once('-') {
        Some((a, b)) => {
            let (a, b) = (index(a)?, index(b)?);
            if a > b {
                return Err(parse_err(line_no, "main span start exceeds end"));
            }
            (a..=b).collect()
        }
        None => vec![index(main_spec)?],
    };
    let tokens = fields[3]
        .strip_prefix("tokens=")
        .ok_or_else(bad)?
        .split(',')
        .map(index)
        .collect::<Result<Vec<_>>>()?;
    Ok(Scene {
        id: 0,
        tokens,
        main: MainRelation { kind, tokens: main },
        participants: Vec::new(),
    })
}
