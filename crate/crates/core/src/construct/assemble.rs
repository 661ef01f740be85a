use thiserror::Error;

use super::SurrogateTable;
use crate::metric::{Metric, PointId};
use crate::net_tree::{NetTree, NodeId};
use crate::spanner::{EdgeKind, FtSpanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssembleMode {
    /// Every non-redundant edge becomes a bipartite clique.
    CliqueOnly,
    /// Edges between two dirty nodes become perfect matchings.
    Matching,
}

#[derive(Debug, Error)]
pub enum AssembleError {
    #[error("dirty node ({point}, {level}) has {size} surrogates, expected {expected}")]
    DirtySize {
        point: PointId,
        level: usize,
        size: usize,
        expected: usize,
    },
}

/// Replaces every tree and cross edge of the basic spanner whose endpoints
/// carry different surrogate sets by a clique or matching between those sets,
/// and connects each dirty leaf point to its own surrogates.
///
/// A level-0 cross edge touching a dirty leaf also keeps the direct edge
/// between its two points: at that level the pair distance can be far below
/// the surrogate radius, so no detour through surrogates is short enough.
pub fn assemble_spanner(
    tree: &NetTree,
    m: &Metric,
    table: &SurrogateTable,
    mode: AssembleMode,
) -> Result<FtSpanner, AssembleError> {
    let k = table.params.k;
    for (x, s) in table.nodes.iter().enumerate() {
        let size = table.surrogates(x).len();
        if s.dirty && size != k + 1 {
            return Err(AssembleError::DirtySize {
                point: tree.node(x).point,
                level: tree.node(x).level,
                size,
                expected: k + 1,
            });
        }
    }

    let mut sp = FtSpanner::new(m.len());
    for i in 0..tree.top_level() {
        for &(a, b) in tree.cross_edges(i) {
            link_sets(&mut sp, m, table, mode, a, b, i, EdgeKind::CrossClique, EdgeKind::CrossMatching);
            if i == 0 && (table.nodes[a].dirty || table.nodes[b].dirty) {
                let (p, q) = (tree.node(a).point, tree.node(b).point);
                sp.insert(p, q, m.dist(p, q), EdgeKind::CrossClique, 0);
            }
        }
    }
    for (x, node) in tree.nodes().iter().enumerate() {
        if let Some(parent) = node.parent {
            link_sets(&mut sp, m, table, mode, x, parent, node.level, EdgeKind::TreeClique, EdgeKind::TreeMatching);
        }
    }
    // A dirty leaf's own point need not be among its surrogates, so the
    // internal clique also covers the point itself.
    for p in 0..m.len() {
        let leaf = tree.leaf(p);
        if !table.nodes[leaf].dirty {
            continue;
        }
        let mut pts = table.surrogates(leaf).to_vec();
        if !pts.contains(&p) {
            pts.push(p);
        }
        for (a, &u) in pts.iter().enumerate() {
            for &v in &pts[a + 1..] {
                sp.insert(u, v, m.dist(u, v), EdgeKind::InternalClique, 0);
            }
        }
    }
    Ok(sp)
}

/// Emits the clique or matching between the surrogate sets of `x` and `y`.
#[allow(clippy::too_many_arguments)]
pub fn link_sets(
    sp: &mut FtSpanner,
    m: &Metric,
    table: &SurrogateTable,
    mode: AssembleMode,
    x: NodeId,
    y: NodeId,
    level: usize,
    clique: EdgeKind,
    matching: EdgeKind,
) {
    let (sx, sy) = (table.nodes[x].set, table.nodes[y].set);
    if sx == sy {
        return;
    }
    let (px, py) = (table.sets.get(sx), table.sets.get(sy));
    let both_dirty = table.nodes[x].dirty && table.nodes[y].dirty;
    if mode == AssembleMode::Matching && both_dirty {
        for (&u, &v) in px.iter().zip(py) {
            sp.insert(u, v, m.dist(u, v), matching, level);
        }
    } else {
        for &u in px {
            for &v in py {
                sp.insert(u, v, m.dist(u, v), clique, level);
            }
        }
    }
}
