//! Shortcutting the low-scale part of the pruned net-tree to bound hop counts.

use std::collections::HashMap;

use crate::construct::{AssembleMode, SurrogateTable};
use crate::metric::Metric;
use crate::net_tree::{rad, NetTree, NodeId};
use crate::spanner::{EdgeKind, FtSpanner};

/// The net-tree restricted to dirty nodes, with redundant sibling groups
/// collapsed into their parents.
#[derive(Clone, Debug, Default)]
pub struct PrunedTree {
    /// Nodes in top-down order.
    pub nodes: Vec<NodeId>,
    pub parent: HashMap<NodeId, NodeId>,
    pub children: HashMap<NodeId, Vec<NodeId>>,
    pub roots: Vec<NodeId>,
}

impl PrunedTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children_of(&self, x: NodeId) -> &[NodeId] {
        self.children.get(&x).map_or(&[], Vec::as_slice)
    }

    pub fn max_children(&self) -> usize {
        self.children.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn contains(&self, x: NodeId) -> bool {
        self.parent.contains_key(&x) || self.roots.contains(&x)
    }
}

/// Drops clean nodes, then walks top-down removing every sibling group whose
/// surrogate sets all equal their parent's, splicing in their dirty children.
pub fn prune_tree(tree: &NetTree, table: &SurrogateTable) -> PrunedTree {
    let dirty = |x: NodeId| table.nodes[x].dirty;
    let mut pt = PrunedTree::default();
    let mut stack: Vec<NodeId> = Vec::new();
    for level in (0..=tree.top_level()).rev() {
        for &x in tree.level(level) {
            let top = tree.node(x).parent.is_none_or(|p| !dirty(p));
            if dirty(x) && top {
                pt.roots.push(x);
                stack.push(x);
            }
        }
    }
    while let Some(x) = stack.pop() {
        pt.nodes.push(x);
        let set = table.nodes[x].set;
        let mut group: Vec<NodeId> = tree.node(x).children.iter().copied().filter(|&c| dirty(c)).collect();
        while !group.is_empty() && group.iter().all(|&c| table.nodes[c].set == set) {
            group = group
                .iter()
                .flat_map(|&c| tree.node(c).children.iter().copied())
                .filter(|&c| dirty(c))
                .collect();
        }
        group.sort_unstable();
        for &c in &group {
            pt.parent.insert(c, x);
        }
        stack.extend(group.iter().rev());
        if !group.is_empty() {
            pt.children.insert(x, group);
        }
    }
    pt
}

/// Maximal subtrees of `pt` whose nodes all have radius below `diameter / n`.
/// Each subtree is listed top-down, starting with its root.
pub fn light_subtrees(tree: &NetTree, pt: &PrunedTree, diameter: f64, n: usize) -> Vec<Vec<NodeId>> {
    if n == 0 {
        return Vec::new();
    }
    let limit = diameter / n as f64;
    let light = |x: NodeId| rad(tree.node(x).level) < limit;
    let mut out = Vec::new();
    for &x in &pt.nodes {
        let root = light(x) && pt.parent.get(&x).is_none_or(|&p| !light(p));
        if !root {
            continue;
        }
        let mut sub = Vec::new();
        let mut stack = vec![x];
        while let Some(y) = stack.pop() {
            sub.push(y);
            stack.extend(pt.children_of(y).iter().rev());
        }
        out.push(sub);
    }
    out
}

/// Shortcut pairs for a rooted tree given by local parent indices (root has
/// `None`), not including the tree edges themselves.
///
/// The tree is split into heavy paths; along each path, positions that are
/// multiples of `2^t` are joined to the next such multiple. Every shortcut
/// joins an ancestor to a descendant, so any monotone tree path can be
/// followed with the shortcuts at the same weight.
pub fn tree_one_spanner(parent: &[Option<usize>]) -> Vec<(usize, usize)> {
    let n = parent.len();
    if n <= 2 {
        return Vec::new();
    }
    let mut children = vec![Vec::new(); n];
    let mut root = 0;
    for (v, p) in parent.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(v),
            None => root = v,
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(&children[v]);
    }
    let mut size = vec![1usize; n];
    for &v in order.iter().rev() {
        if let Some(p) = parent[v] {
            size[p] += size[v];
        }
    }
    let heavy: Vec<Option<usize>> = children
        .iter()
        .map(|c| c.iter().copied().max_by_key(|&u| (size[u], std::cmp::Reverse(u))))
        .collect();

    let mut pairs = Vec::new();
    for &head in &order {
        if parent[head].is_some_and(|p| heavy[p] == Some(head)) {
            continue;
        }
        let mut path = vec![head];
        while let Some(h) = heavy[*path.last().unwrap()] {
            path.push(h);
        }
        let mut step = 2;
        while step < path.len() {
            let mut j = 0;
            while j + step < path.len() {
                pairs.push((path[j], path[j + step]));
                j += step;
            }
            step *= 2;
        }
    }
    pairs
}

/// Shortcut pairs of net-tree nodes for every light subtree of `pt`.
pub fn shortcut_pairs(tree: &NetTree, pt: &PrunedTree, diameter: f64, n: usize) -> Vec<(NodeId, NodeId)> {
    let mut out = Vec::new();
    for sub in light_subtrees(tree, pt, diameter, n) {
        let local: HashMap<NodeId, usize> = sub.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let parent: Vec<Option<usize>> = sub
            .iter()
            .map(|x| pt.parent.get(x).and_then(|p| local.get(p).copied()))
            .collect();
        out.extend(tree_one_spanner(&parent).into_iter().map(|(a, b)| (sub[a], sub[b])));
    }
    out
}

/// Adds a matching between the surrogate sets of each shortcut pair.
pub fn add_shortcuts(
    sp: &mut FtSpanner,
    tree: &NetTree,
    m: &Metric,
    table: &SurrogateTable,
    pairs: &[(NodeId, NodeId)],
) -> usize {
    let before = sp.len();
    for &(x, y) in pairs {
        assert!(
            table.nodes[x].dirty && table.nodes[y].dirty,
            "shortcut endpoint is clean"
        );
        let level = tree.node(x).level.max(tree.node(y).level);
        crate::construct::link_sets(
            sp,
            m,
            table,
            AssembleMode::Matching,
            x,
            y,
            level,
            EdgeKind::ShortcutClique,
            EdgeKind::ShortcutMatching,
        );
    }
    sp.len() - before
}
