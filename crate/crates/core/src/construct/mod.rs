//! Surrogate, descendant, friend and reserve sets of the net-tree nodes, and
//! the fault-tolerant spanner obtained from them.

mod assemble;
mod sets;

use std::collections::HashMap;

use thiserror::Error;

use crate::metric::PointId;
use crate::net_tree::NodeId;

pub use assemble::{assemble_spanner, link_sets, AssembleError, AssembleMode};
pub use sets::compute_sets;

/// Default cross-edge reach: `max(395, ceil(600 / eps))`.
pub fn default_gamma(eps: f64) -> f64 {
    (600.0 / eps).ceil().max(395.0)
}

/// `ceil(log_5 gamma) + 1`.
pub fn tau_for(gamma: f64) -> usize {
    let mut t = 0;
    let mut p = 1.0;
    while p < gamma * (1.0 - 1e-12) {
        p *= 5.0;
        t += 1;
    }
    t + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReservePolicy {
    /// Keep entries from the last `tau` levels plus up to `3k+3` older
    /// 10-friends, within a hard capacity.
    Truncated,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct Params {
    pub k: usize,
    pub eps: f64,
    pub gamma: f64,
    pub tau: usize,
    pub xi: usize,
    /// Degree threshold `(tau + 4) * xi^2 * (2k + 1)`.
    pub degree_threshold: u64,
    pub reserve: ReservePolicy,
}

impl Params {
    pub fn new(k: usize, eps: f64, gamma: f64, xi: usize) -> Self {
        let tau = tau_for(gamma);
        let xi = xi.max(1);
        Params {
            k,
            eps,
            gamma,
            tau,
            xi,
            degree_threshold: (tau as u64 + 4) * (xi as u64).pow(2) * (2 * k as u64 + 1),
            reserve: ReservePolicy::Truncated,
        }
    }

    pub fn with_reserve(mut self, policy: ReservePolicy) -> Self {
        self.reserve = policy;
        self
    }

    pub fn friend_cap(&self) -> usize {
        3 * self.k + 3
    }

    /// `|F| >= 2k+2` makes a node large.
    pub fn large(&self) -> usize {
        2 * self.k + 2
    }

    pub fn reserve_capacity(&self) -> usize {
        ((self.tau + 4) * self.friend_cap() * self.xi).max(self.friend_cap())
    }
}

/// Interned surrogate set; two nodes share a set exactly when their ids agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetId(pub u32);

#[derive(Clone, Debug, Default)]
pub struct SurrogateSets {
    sets: Vec<Vec<PointId>>,
    lookup: HashMap<Vec<PointId>, SetId>,
}

impl SurrogateSets {
    pub fn intern(&mut self, mut points: Vec<PointId>) -> SetId {
        points.sort_unstable();
        points.dedup();
        if let Some(&id) = self.lookup.get(&points) {
            return id;
        }
        let id = SetId(self.sets.len() as u32);
        self.lookup.insert(points.clone(), id);
        self.sets.push(points);
        id
    }

    /// Points of the set, ascending.
    pub fn get(&self, id: SetId) -> &[PointId] {
        &self.sets[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Lifetime of one appointed surrogate set.
#[derive(Clone, Debug)]
pub struct Term {
    pub set: SetId,
    pub appointer: NodeId,
    pub start_level: usize,
    /// Distinct spanner neighbours gained through non-redundant cross edges
    /// since the appointment.
    pub gained: usize,
    pub phase_one_end: Option<usize>,
    pub forced_over_at: Option<usize>,
}

impl Term {
    pub fn over_at(&self, level: usize, tau: usize) -> bool {
        self.forced_over_at.is_some_and(|f| level >= f)
            || self.phase_one_end.is_some_and(|e| level > e + tau + 2)
    }
}

pub type TermId = usize;

/// How a node obtained its surrogate set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assignment {
    /// Small clean node, `S = D`.
    Clean,
    /// Appointed `k+1` new surrogates from its friend set.
    Appointed,
    /// Re-used the set of a dirty non-leech child.
    Inherited(NodeId),
    /// Re-used the set of a dirty non-leech host at the same level.
    Leech(NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReserveEntry {
    pub point: PointId,
    /// Level at which the point entered the reserve of this node's lineage.
    pub since: usize,
}

#[derive(Clone, Debug)]
pub struct NodeState {
    pub set: SetId,
    pub assignment: Assignment,
    pub dirty: bool,
    pub descendants: Vec<PointId>,
    pub friends: Vec<PointId>,
    pub reserve: Vec<ReserveEntry>,
    /// The appointing copy `a(x)` of a dirty node.
    pub appointer: Option<NodeId>,
    pub term: Option<TermId>,
    pub is_host: bool,
}

impl NodeState {
    pub fn is_leech(&self) -> bool {
        matches!(self.assignment, Assignment::Leech(_))
    }

    pub fn host(&self) -> Option<NodeId> {
        match self.assignment {
            Assignment::Leech(h) => Some(h),
            _ => None,
        }
    }
}

/// Output of [`compute_sets`].
#[derive(Clone, Debug)]
pub struct SurrogateTable {
    pub params: Params,
    pub nodes: Vec<NodeState>,
    pub sets: SurrogateSets,
    pub terms: Vec<Term>,
    /// Level at which each point was appointed as a new surrogate, if ever.
    pub dirty_since: Vec<Option<usize>>,
    pub appointed_by: Vec<Option<NodeId>>,
    /// `deg_by_level[i][p]`: distinct cross-edge neighbours of `p` in the
    /// clique spanner after the level-`i` cross edges.
    pub deg_by_level: Vec<Vec<u32>>,
    /// Nodes that appointed with fewer than `2k+2` friends.
    pub small_appointments: Vec<NodeId>,
}

impl SurrogateTable {
    pub fn surrogates(&self, x: NodeId) -> &[PointId] {
        self.sets.get(self.nodes[x].set)
    }

    pub fn final_degree(&self, p: PointId) -> u32 {
        self.deg_by_level.last().map_or(0, |d| d[p])
    }
}

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("k = {k} exceeds n - 2 = {max}")]
    KTooLarge { k: usize, max: usize },
    #[error(
        "node ({point}, {level}) must appoint {need} surrogates but has only {have} clean friends: {friends:?}"
    )]
    InsufficientFriends {
        point: PointId,
        level: usize,
        need: usize,
        have: usize,
        friends: Vec<PointId>,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_and_tau_defaults() {
        assert_eq!(default_gamma(0.5), 1200.0);
        assert_eq!(default_gamma(1.0), 600.0);
        assert_eq!(default_gamma(4.0), 395.0);
        // 5^4 = 625 < 1200 <= 3125
        assert_eq!(tau_for(1200.0), 6);
        assert_eq!(tau_for(600.0), 5);
        assert_eq!(tau_for(625.0), 5);
        assert_eq!(tau_for(395.0), 5);
    }

    #[test]
    fn threshold_formula() {
        let p = Params::new(2, 0.5, 400.0, 3);
        assert_eq!(p.tau, 5);
        assert_eq!(p.degree_threshold, 9 * 9 * 5);
        assert!(p.degree_threshold >= 2 * 2 + 1);
        assert_eq!(p.friend_cap(), 9);
        assert_eq!(p.large(), 6);
    }

    #[test]
    fn interning_is_order_insensitive() {
        let mut s = SurrogateSets::default();
        let a = s.intern(vec![3, 1, 2]);
        let b = s.intern(vec![1, 2, 3]);
        let c = s.intern(vec![1, 2]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(s.get(a), &[1, 2, 3]);
    }

    #[test]
    fn term_expiry() {
        let mut t = Term {
            set: SetId(0),
            appointer: 0,
            start_level: 2,
            gained: 0,
            phase_one_end: None,
            forced_over_at: None,
        };
        assert!(!t.over_at(100, 3));
        t.phase_one_end = Some(4);
        assert!(!t.over_at(9, 3));
        assert!(t.over_at(10, 3));
        t.forced_over_at = Some(5);
        assert!(t.over_at(5, 3));
        assert!(!t.over_at(4, 3));
    }
}
