use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::SceneCover;

/// Square matrix of hop counts where unreachable pairs hold the
/// [`DistMatrix::INF`] sentinel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistMatrix {
    pub const INF: u32 = u32::MAX;

    pub fn filled(n: usize, value: u32) -> Self {
        DistMatrix {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Raw entry, possibly [`DistMatrix::INF`].
    pub fn raw(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        match self.raw(i, j) {
            Self::INF => None,
            d => Some(d),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, d: u32) {
        self.data[i * self.n + j] = d;
    }
}

/// Scenes as nodes, with an undirected edge between two scenes that share
/// at least one token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneGraph {
    adjacency: Vec<Vec<usize>>,
}

impl SceneGraph {
    pub fn from_cover(cover: &SceneCover) -> Self {
        let scenes = cover.scenes();
        let mut adjacency = vec![Vec::new(); scenes.len()];
        for s in 0..scenes.len() {
            for t in s + 1..scenes.len() {
                if intersects(&scenes[s].tokens, &scenes[t].tokens) {
                    adjacency[s].push(t);
                    adjacency[t].push(s);
                }
            }
        }
        SceneGraph { adjacency }
    }

    pub fn neighbours(&self, scene: usize) -> &[usize] {
        &self.adjacency[scene]
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Hop distances between every pair of scenes (BFS from each scene).
    pub fn shortest_paths(&self) -> DistMatrix {
        let n = self.adjacency.len();
        let mut out = DistMatrix::filled(n, DistMatrix::INF);
        let mut queue = VecDeque::new();
        for src in 0..n {
            out.set(src, src, 0);
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                let du = out.raw(src, u);
                for &v in &self.adjacency[u] {
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

fn intersects(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Token-level scene distance: 0 for tokens sharing a scene, otherwise the
/// fewest scene-graph hops between any scene of `i` and any scene of `j`.
/// Unassigned tokens are at infinite distance from everything, themselves
/// included.
pub fn scene_distance(cover: &SceneCover) -> DistMatrix {
    let len = cover.len();
    let scene_dist = SceneGraph::from_cover(cover).shortest_paths();
    let membership = cover.membership();
    let mut out = DistMatrix::filled(len, DistMatrix::INF);
    for i in 0..len {
        for j in i..len {
            let mut best = DistMatrix::INF;
            for &s in &membership[i] {
                for &t in &membership[j] {
                    best = best.min(scene_dist.raw(s, t));
                }
            }
            out.set(i, j, best);
            out.set(j, i, best);
        }
    }
    out
}
