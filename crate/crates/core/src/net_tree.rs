//! Hierarchical nets, the net-tree over them, and the cross-edge spanner.

use std::fmt;

use thiserror::Error;

use crate::metric::{approx_le, Metric, PointId};

pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum NetTreeError {
    #[error("level {level}: point {point} is not covered within 3*5^{level}")]
    Uncovered { level: usize, point: PointId },
    #[error("level {level}: no parent for point {point}")]
    NoParent { level: usize, point: PointId },
    #[error("points {p} and {q} never meet below the root")]
    NoConnectingLevel { p: PointId, q: PointId },
}

/// A net point `p` at level `i`, written `(p, i)`.
#[derive(Clone, Debug)]
pub struct Node {
    pub point: PointId,
    pub level: usize,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Same-level neighbours joined by a cross edge, sorted by node id.
    pub cross: Vec<NodeId>,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.point, self.level)
    }
}

/// `5^level` as a float.
#[inline]
pub fn rad(level: usize) -> f64 {
    5f64.powi(level as i32)
}

#[derive(Clone, Debug)]
pub struct NetTree {
    nodes: Vec<Node>,
    /// Node ids per level, ascending by point id.
    levels: Vec<Vec<NodeId>>,
    /// `chain[p][i]` is the node `(p, i)` for every level at which `p` is a net point.
    chain: Vec<Vec<NodeId>>,
    /// `ancestor[p][i]` is the `i`-level node whose descendant set contains `p`.
    ancestor: Vec<Vec<NodeId>>,
    /// Cross edges per level as `(a, b)` with `a < b`.
    cross_edges: Vec<Vec<(NodeId, NodeId)>>,
    gamma: Option<f64>,
    xi: usize,
}

impl NetTree {
    /// Builds the hierarchical nets `N_0 = X ⊇ N_1 ⊇ ...` and the tree over them.
    ///
    /// Each level is a greedy scan of the previous net in ascending point id,
    /// keeping a point unless an already kept point lies within `3 * 5^i`; the
    /// result is both a `3 * 5^i`-cover and a `5^i`-packing. Levels continue
    /// until the net is a singleton and `ceil(log_5 diameter)` is reached.
    pub fn build(m: &Metric) -> Result<NetTree, NetTreeError> {
        let n = m.len();
        let diam = m.diameter();
        let log_top = if diam > 1.0 {
            diam.log(5.0).ceil() as usize
        } else {
            0
        };

        let mut nodes: Vec<Node> = Vec::with_capacity(2 * n);
        let mut levels: Vec<Vec<NodeId>> = Vec::new();
        let mut chain: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        let mut prev: Vec<PointId> = (0..n).collect();
        let mut level_nodes = Vec::with_capacity(n);
        for &p in &prev {
            let id = nodes.len();
            nodes.push(Node {
                point: p,
                level: 0,
                parent: None,
                children: Vec::new(),
                cross: Vec::new(),
            });
            chain[p].push(id);
            level_nodes.push(id);
        }
        levels.push(level_nodes);

        let mut i = 0;
        while prev.len() > 1 || i < log_top {
            i += 1;
            let cover = 3.0 * rad(i);
            let mut net: Vec<PointId> = Vec::new();
            for &p in &prev {
                if !net.iter().any(|&q| approx_le(m.dist(p, q), cover)) {
                    net.push(p);
                }
            }
            let mut level_nodes = Vec::with_capacity(net.len());
            for &p in &net {
                let id = nodes.len();
                nodes.push(Node {
                    point: p,
                    level: i,
                    parent: None,
                    children: Vec::new(),
                    cross: Vec::new(),
                });
                chain[p].push(id);
                level_nodes.push(id);
            }
            // Parent of (p, i-1): (p, i) if p survives, otherwise the
            // lowest-id net point within 3 * 5^i.
            for &child in &levels[i - 1] {
                let p = nodes[child].point;
                let parent_point = if chain[p].len() > i {
                    p
                } else {
                    *net.iter()
                        .find(|&&q| approx_le(m.dist(p, q), cover))
                        .ok_or(NetTreeError::NoParent { level: i, point: p })?
                };
                let parent = chain[parent_point][i];
                nodes[child].parent = Some(parent);
                nodes[parent].children.push(child);
            }
            for &id in &level_nodes {
                nodes[id].children.sort_unstable();
            }
            levels.push(level_nodes);
            prev = net;
        }

        let top = levels.len() - 1;
        let mut ancestor = vec![Vec::with_capacity(top + 1); n];
        for (p, anc) in ancestor.iter_mut().enumerate() {
            let mut cur = Some(chain[p][0]);
            while let Some(v) = cur {
                anc.push(v);
                cur = nodes[v].parent;
            }
        }

        let tree = NetTree {
            nodes,
            levels,
            chain,
            ancestor,
            cross_edges: Vec::new(),
            gamma: None,
            xi: 0,
        };
        tree.check_covering(m)?;
        Ok(tree)
    }

    fn check_covering(&self, m: &Metric) -> Result<(), NetTreeError> {
        for i in 1..self.levels.len() {
            let cover = 3.0 * rad(i);
            for &c in &self.levels[i - 1] {
                let p = self.nodes[c].point;
                if !self.levels[i]
                    .iter()
                    .any(|&q| approx_le(m.dist(p, self.nodes[q].point), cover))
                {
                    return Err(NetTreeError::Uncovered { level: i, point: p });
                }
            }
        }
        Ok(())
    }

    /// Adds a cross edge between every pair of distinct `i`-level nodes within
    /// `gamma * 5^i`, for every level below the root, and records `xi`.
    pub fn add_cross_edges(&mut self, m: &Metric, gamma: f64) {
        let top = self.top_level();
        self.gamma = Some(gamma);
        self.cross_edges = vec![Vec::new(); top + 1];
        for node in &mut self.nodes {
            node.cross.clear();
        }
        for i in 0..top {
            let reach = gamma * rad(i);
            let ids = &self.levels[i];
            let mut edges = Vec::new();
            for (x, &a) in ids.iter().enumerate() {
                for &b in &ids[x + 1..] {
                    let d = m.dist(self.nodes[a].point, self.nodes[b].point);
                    if approx_le(d, reach) {
                        edges.push((a.min(b), a.max(b)));
                    }
                }
            }
            for &(a, b) in &edges {
                self.nodes[a].cross.push(b);
                self.nodes[b].cross.push(a);
            }
            self.cross_edges[i] = edges;
        }
        for node in &mut self.nodes {
            node.cross.sort_unstable();
        }
        self.xi = self
            .nodes
            .iter()
            .map(|v| v.cross.len() + v.children.len() + usize::from(v.parent.is_some()))
            .max()
            .unwrap_or(0);
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_points(&self) -> usize {
        self.chain.len()
    }

    /// The level of the root, `ℓ`.
    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn root(&self) -> NodeId {
        self.levels[self.top_level()][0]
    }

    pub fn level(&self, i: usize) -> &[NodeId] {
        &self.levels[i]
    }

    /// The net `N_i` as point ids.
    pub fn net_points(&self, i: usize) -> Vec<PointId> {
        self.levels[i].iter().map(|&v| self.nodes[v].point).collect()
    }

    /// The node `(p, i)`, if `p ∈ N_i`.
    pub fn node_of(&self, p: PointId, i: usize) -> Option<NodeId> {
        self.chain[p].get(i).copied()
    }

    pub fn leaf(&self, p: PointId) -> NodeId {
        self.chain[p][0]
    }

    /// The unique `i`-level node whose descendant set contains `p`.
    pub fn base_bag(&self, p: PointId, i: usize) -> NodeId {
        self.ancestor[p][i]
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// Realized maximum number of tree plus cross edges at any node.
    pub fn xi(&self) -> usize {
        self.xi
    }

    pub fn cross_edges(&self, i: usize) -> &[(NodeId, NodeId)] {
        self.cross_edges.get(i).map_or(&[], Vec::as_slice)
    }

    pub fn cross_edge_count(&self) -> usize {
        self.cross_edges.iter().map(Vec::len).sum()
    }

    pub fn has_cross_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.nodes[a].cross.binary_search(&b).is_ok()
    }

    pub fn is_ancestor(&self, anc: NodeId, mut v: NodeId) -> bool {
        let target = self.nodes[anc].level;
        while self.nodes[v].level < target {
            match self.nodes[v].parent {
                Some(p) => v = p,
                None => return false,
            }
        }
        v == anc
    }

    /// Points in the descendant leaves of `v`, ascending.
    pub fn descendant_points(&self, v: NodeId) -> Vec<PointId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            let node = &self.nodes[x];
            if node.level == 0 {
                out.push(node.point);
            } else {
                stack.extend(&node.children);
            }
        }
        out.sort_unstable();
        out
    }

    /// The canonical climbing path between `p` and `q` in the basic spanner:
    /// climb from both leaves in lockstep and cross at the lowest level where
    /// the ancestors coincide or share a cross edge. The returned node path
    /// runs from `(p, 0)` to `(q, 0)`.
    pub fn base_spanner_path(&self, p: PointId, q: PointId) -> Result<Vec<NodeId>, NetTreeError> {
        for j in 0..=self.top_level() {
            let a = self.ancestor[p][j];
            let b = self.ancestor[q][j];
            if a == b || self.has_cross_edge(a, b) {
                let mut path: Vec<NodeId> = self.ancestor[p][..=j].to_vec();
                let down = &self.ancestor[q][..=j];
                let skip = usize::from(a == b);
                path.extend(down.iter().rev().skip(skip));
                return Ok(path);
            }
        }
        Err(NetTreeError::NoConnectingLevel { p, q })
    }

    /// Sum of point distances along a node path.
    pub fn path_weight(&self, m: &Metric, path: &[NodeId]) -> f64 {
        path.windows(2)
            .map(|w| m.dist(self.nodes[w[0]].point, self.nodes[w[1]].point))
            .sum()
    }

    /// The basic spanner `H` as a point graph: tree and cross edges translated
    /// to their net points, self-loops dropped, duplicates merged.
    pub fn base_spanner_edges(&self) -> Vec<(PointId, PointId)> {
        let mut edges = Vec::new();
        for v in &self.nodes {
            if let Some(par) = v.parent {
                edges.push(ordered(v.point, self.nodes[par].point));
            }
        }
        for level in &self.cross_edges {
            for &(a, b) in level {
                edges.push(ordered(self.nodes[a].point, self.nodes[b].point));
            }
        }
        edges.retain(|&(a, b)| a != b);
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

fn ordered(a: PointId, b: PointId) -> (PointId, PointId) {
    (a.min(b), a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> Metric {
        Metric::from_points(xs.iter().map(|&x| vec![x]).collect())
            .unwrap()
            .normalize()
    }

    fn plane(n: usize, seed: u64) -> Metric {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Metric::from_points(
            (0..n)
                .map(|_| vec![rng.gen::<f64>() * 100.0, rng.gen::<f64>() * 100.0])
                .collect(),
        )
        .unwrap()
        .normalize()
    }

    #[test]
    fn singleton_tree() {
        let m = Metric::from_points(vec![vec![0.0, 0.0]]).unwrap();
        let mut t = NetTree::build(&m).unwrap();
        t.add_cross_edges(&m, 400.0);
        assert_eq!(t.top_level(), 0);
        assert_eq!(t.len(), 1);
        assert_eq!(t.cross_edge_count(), 0);
        assert_eq!(t.xi(), 0);
    }

    #[test]
    fn four_point_line_trace() {
        let m = line(&[0.0, 1.0, 7.0, 30.0]);
        let mut t = NetTree::build(&m).unwrap();
        assert_eq!(t.net_points(0), vec![0, 1, 2, 3]);
        assert_eq!(t.net_points(1), vec![0, 3]);
        assert_eq!(t.net_points(2), vec![0]);
        // ceil(log_5 30) = 3 keeps a lonely chain above the first singleton net.
        assert_eq!(t.top_level(), 3);
        let par = |p: PointId| t.node(t.node(t.leaf(p)).parent.unwrap()).point;
        assert_eq!((par(0), par(1), par(2), par(3)), (0, 0, 0, 3));
        for p in [0, 3] {
            let v = t.node_of(p, 1).unwrap();
            assert_eq!(t.node(v).parent, t.node_of(0, 2));
        }
        t.add_cross_edges(&m, 400.0);
        assert_eq!(t.cross_edges(0).len(), 6);
        assert_eq!(t.cross_edges(1).len(), 1);
        assert_eq!(t.cross_edge_count(), 7);
    }

    #[test]
    fn net_invariants_on_random_plane() {
        let m = plane(200, 1);
        let t = NetTree::build(&m).unwrap();
        let top = t.top_level();
        assert_eq!(t.level(0).len(), 200);
        assert_eq!(t.level(top).len(), 1);
        for i in 1..=top {
            let net = t.net_points(i);
            let below = t.net_points(i - 1);
            assert!(net.iter().all(|p| below.contains(p)));
            for (x, &p) in net.iter().enumerate() {
                for &q in &net[x + 1..] {
                    assert!(m.dist(p, q) > rad(i));
                }
            }
            for &p in &below {
                assert!(net.iter().any(|&q| m.dist(p, q) <= 3.0 * rad(i) * (1.0 + 1e-9)));
            }
        }
        for v in t.nodes() {
            if let Some(par) = v.parent {
                let pn = t.node(par);
                assert!(m.dist(v.point, pn.point) <= 3.0 * rad(pn.level) * (1.0 + 1e-9));
                if t.node_of(v.point, v.level + 1).is_some() {
                    assert_eq!(pn.point, v.point);
                }
            }
            for p in t.descendant_points(t.nodes().iter().position(|u| std::ptr::eq(u, v)).unwrap()) {
                assert!(m.dist(p, v.point) <= 4.0 * rad(v.level) * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn base_bags_are_unique_per_level() {
        let m = plane(80, 2);
        let t = NetTree::build(&m).unwrap();
        for i in 0..=t.top_level() {
            let mut seen = vec![0usize; 80];
            for &v in t.level(i) {
                for p in t.descendant_points(v) {
                    seen[p] += 1;
                    assert_eq!(t.base_bag(p, i), v);
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn cross_edges_respect_reach() {
        let m = plane(120, 3);
        let mut t = NetTree::build(&m).unwrap();
        t.add_cross_edges(&m, 395.0);
        for i in 0..t.top_level() {
            for &(a, b) in t.cross_edges(i) {
                let d = m.dist(t.node(a).point, t.node(b).point);
                assert!(d <= 395.0 * rad(i) * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn base_path_single_edge_when_cross_linked() {
        let m = line(&[0.0, 1.0, 7.0, 30.0]);
        let mut t = NetTree::build(&m).unwrap();
        t.add_cross_edges(&m, 400.0);
        let path = t.base_spanner_path(1, 3).unwrap();
        assert_eq!(path, vec![t.leaf(1), t.leaf(3)]);
        assert_eq!(t.path_weight(&m, &path), 29.0);
    }

    #[test]
    fn base_path_climbs_when_far() {
        // Two tight pairs far apart relative to gamma.
        let m = line(&[0.0, 1.0, 10_000.0, 10_001.0]);
        let mut t = NetTree::build(&m).unwrap();
        t.add_cross_edges(&m, 10.0);
        let path = t.base_spanner_path(1, 3).unwrap();
        assert!(path.len() > 2);
        assert_eq!(t.node(path[0]).point, 1);
        assert_eq!(t.node(*path.last().unwrap()).point, 3);
        for w in path.windows(2) {
            let (a, b) = (t.node(w[0]), t.node(w[1]));
            let linked = a.parent == Some(w[1]) || b.parent == Some(w[0]) || t.has_cross_edge(w[0], w[1]);
            assert!(linked);
        }
    }
}
