use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metric::{Metric, PointId};

/// Which part of the construction produced an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    CrossClique,
    CrossMatching,
    TreeClique,
    TreeMatching,
    InternalClique,
    ShortcutMatching,
    ShortcutClique,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 7] = [
        EdgeKind::CrossClique,
        EdgeKind::CrossMatching,
        EdgeKind::TreeClique,
        EdgeKind::TreeMatching,
        EdgeKind::InternalClique,
        EdgeKind::ShortcutMatching,
        EdgeKind::ShortcutClique,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::CrossClique => "cross-clique",
            EdgeKind::CrossMatching => "cross-matching",
            EdgeKind::TreeClique => "tree-clique",
            EdgeKind::TreeMatching => "tree-matching",
            EdgeKind::InternalClique => "internal-clique",
            EdgeKind::ShortcutMatching => "shortcut-matching",
            EdgeKind::ShortcutClique => "shortcut-clique",
        }
    }

    pub fn is_shortcut(self) -> bool {
        matches!(self, EdgeKind::ShortcutMatching | EdgeKind::ShortcutClique)
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: PointId,
    pub v: PointId,
    pub w: f64,
    pub kind: EdgeKind,
    pub level: usize,
}

/// Weighted undirected edge list over points `0..n`, without self-loops or
/// parallel edges. When a pair is offered twice the first kind is kept.
#[derive(Clone, Debug, Default)]
pub struct FtSpanner {
    n: usize,
    edges: Vec<Edge>,
    index: HashMap<(PointId, PointId), usize>,
}

impl FtSpanner {
    pub fn new(n: usize) -> Self {
        FtSpanner {
            n,
            edges: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Complete graph on all points of `m`.
    pub fn complete(m: &Metric) -> Self {
        let mut sp = FtSpanner::new(m.len());
        for u in 0..m.len() {
            for v in u + 1..m.len() {
                sp.insert(u, v, m.dist(u, v), EdgeKind::CrossClique, 0);
            }
        }
        sp
    }

    /// Inserts `{u, v}`; returns false for self-loops and pairs already present.
    pub fn insert(&mut self, u: PointId, v: PointId, w: f64, kind: EdgeKind, level: usize) -> bool {
        assert!(u < self.n && v < self.n, "edge ({u}, {v}) out of range for n = {}", self.n);
        if u == v {
            return false;
        }
        let key = (u.min(v), u.max(v));
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key, self.edges.len());
        self.edges.push(Edge {
            u: key.0,
            v: key.1,
            w,
            kind,
            level,
        });
        true
    }

    pub fn contains(&self, u: PointId, v: PointId) -> bool {
        self.index.contains_key(&(u.min(v), u.max(v)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Keeps only the edges for which `keep` returns true.
    pub fn retain(&mut self, mut keep: impl FnMut(&Edge) -> bool) {
        self.edges.retain(|e| keep(e));
        self.index = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.u, e.v), i))
            .collect();
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn adjacency(&self) -> Vec<Vec<(PointId, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
        adj
    }

    pub fn count_by_kind(&self) -> Vec<(EdgeKind, usize)> {
        EdgeKind::ALL
            .iter()
            .map(|&k| (k, self.edges.iter().filter(|e| e.kind == k).count()))
            .collect()
    }
}
