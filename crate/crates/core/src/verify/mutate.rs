//! Seeded defects for checking that the audit notices broken tables.

use crate::construct::{Assignment, SurrogateTable};
use crate::metric::{Metric, PointId};
use crate::net_tree::{rad, NetTree, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// A clean node's surrogates differ from its descendants.
    CleanSetMismatch,
    /// A dirty node gets `k+2` surrogates.
    ExtraSurrogate,
    /// The parent of a dirty node is turned clean.
    CleanParentOfDirty,
    /// Two same-level dirty non-leeches share a surrogate.
    SharedSurrogate,
    /// A surrogate is moved far away from its node.
    FarSurrogate,
    /// A leech points at a clean host.
    CleanHost,
    /// An appointment re-uses an already dirty point.
    Reappointment,
    /// A point's degree counter blows past the threshold.
    HugeDegree,
    /// The parent of an appointing node appoints too.
    AncestorAppoints,
    /// A descendant point of a clean node is marked dirty.
    DirtyUnderClean,
}

impl Mutation {
    pub const ALL: [Mutation; 10] = [
        Mutation::CleanSetMismatch,
        Mutation::ExtraSurrogate,
        Mutation::CleanParentOfDirty,
        Mutation::SharedSurrogate,
        Mutation::FarSurrogate,
        Mutation::CleanHost,
        Mutation::Reappointment,
        Mutation::HugeDegree,
        Mutation::AncestorAppoints,
        Mutation::DirtyUnderClean,
    ];

    /// The invariant the defect is aimed at.
    pub fn target(self) -> u8 {
        match self {
            Mutation::CleanSetMismatch => 2,
            Mutation::ExtraSurrogate => 1,
            Mutation::CleanParentOfDirty => 1,
            Mutation::SharedSurrogate => 4,
            Mutation::FarSurrogate => 6,
            Mutation::CleanHost => 9,
            Mutation::Reappointment => 10,
            Mutation::HugeDegree => 7,
            Mutation::AncestorAppoints => 8,
            Mutation::DirtyUnderClean => 3,
        }
    }
}

/// Applies `mutation` to the first node it fits; returns false when the
/// table has no such node.
pub fn apply(mutation: Mutation, tree: &NetTree, m: &Metric, table: &mut SurrogateTable) -> bool {
    let n_nodes = tree.len();
    let dirty = |t: &SurrogateTable, x: NodeId| t.nodes[x].dirty;
    match mutation {
        Mutation::CleanSetMismatch => {
            let Some(x) = (0..n_nodes).find(|&x| !dirty(table, x) && tree.node(x).level > 0) else {
                return false;
            };
            let mut pts = table.surrogates(x).to_vec();
            if pts.len() > 1 {
                pts.pop();
            } else {
                pts.push((pts[0] + 1) % m.len());
            }
            table.nodes[x].set = table.sets.intern(pts);
            true
        }
        Mutation::ExtraSurrogate => {
            let Some(x) = (0..n_nodes).find(|&x| dirty(table, x)) else {
                return false;
            };
            let mut pts = table.surrogates(x).to_vec();
            let extra = (0..m.len()).find(|p| !pts.contains(p)).unwrap();
            pts.push(extra);
            table.nodes[x].set = table.sets.intern(pts);
            true
        }
        Mutation::CleanParentOfDirty => {
            let Some(x) = (0..n_nodes).find(|&x| dirty(table, x) && tree.node(x).parent.is_some()) else {
                return false;
            };
            let p = tree.node(x).parent.unwrap();
            let set = table.sets.intern(table.nodes[p].descendants.clone());
            let node = &mut table.nodes[p];
            node.dirty = false;
            node.set = set;
            node.assignment = Assignment::Clean;
            true
        }
        Mutation::SharedSurrogate => {
            for i in 0..=tree.top_level() {
                let non_leech: Vec<NodeId> = tree
                    .level(i)
                    .iter()
                    .copied()
                    .filter(|&x| dirty(table, x) && !table.nodes[x].is_leech())
                    .collect();
                if non_leech.len() >= 2 {
                    let (x, y) = (non_leech[0], non_leech[1]);
                    let mut pts = table.surrogates(y).to_vec();
                    pts[0] = table.surrogates(x)[0];
                    table.nodes[y].set = table.sets.intern(pts);
                    return true;
                }
            }
            false
        }
        Mutation::FarSurrogate => {
            let Some(x) = (0..n_nodes).find(|&x| dirty(table, x)) else {
                return false;
            };
            let node = tree.node(x);
            let reach = 34.0 * rad(node.level);
            let Some(far) = (0..m.len()).find(|&p| m.dist(p, node.point) > reach * 1.01) else {
                return false;
            };
            let mut pts = table.surrogates(x).to_vec();
            if pts.contains(&far) {
                return false;
            }
            pts[0] = far;
            table.nodes[x].set = table.sets.intern(pts);
            true
        }
        Mutation::CleanHost => {
            let Some(x) = (0..n_nodes).find(|&x| table.nodes[x].is_leech()) else {
                return false;
            };
            let level = tree.node(x).level;
            let Some(&c) = tree.level(level).iter().find(|&&c| !dirty(table, c)) else {
                return false;
            };
            table.nodes[x].assignment = Assignment::Leech(c);
            true
        }
        Mutation::Reappointment => {
            let appointers: Vec<NodeId> = (0..n_nodes)
                .filter(|&x| table.nodes[x].assignment == Assignment::Appointed)
                .collect();
            if appointers.len() < 2 {
                return false;
            }
            let (a, b) = (appointers[0], appointers[1]);
            let mut pts: Vec<PointId> = table.surrogates(b).to_vec();
            pts[0] = table.surrogates(a)[0];
            table.nodes[b].set = table.sets.intern(pts);
            true
        }
        Mutation::HugeDegree => {
            let d = table.params.degree_threshold;
            let Some(last) = table.deg_by_level.last_mut() else {
                return false;
            };
            last[0] = u32::try_from(2 * d + 1).unwrap_or(u32::MAX);
            true
        }
        Mutation::AncestorAppoints => {
            let Some(x) = (0..n_nodes)
                .find(|&x| table.nodes[x].assignment == Assignment::Appointed && tree.node(x).parent.is_some())
            else {
                return false;
            };
            let p = tree.node(x).parent.unwrap();
            table.nodes[p].assignment = Assignment::Appointed;
            true
        }
        Mutation::DirtyUnderClean => {
            let Some(x) = (0..n_nodes).find(|&x| !dirty(table, x)) else {
                return false;
            };
            let p = table.nodes[x].descendants[0];
            table.dirty_since[p] = Some(tree.node(x).level);
            true
        }
    }
}
