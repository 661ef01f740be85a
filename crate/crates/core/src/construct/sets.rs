use std::cmp::Reverse;
use std::collections::{HashMap, HashSet};

use log::debug;

use super::{
    Assignment, ConstructError, NodeState, Params, ReserveEntry, ReservePolicy, SetId, SurrogateSets,
    SurrogateTable, Term, TermId,
};
use crate::metric::{approx_le, Metric, PointId};
use crate::net_tree::{rad, NetTree, NodeId};

struct Builder<'a> {
    tree: &'a NetTree,
    m: &'a Metric,
    params: &'a Params,
    nodes: Vec<NodeState>,
    sets: SurrogateSets,
    terms: Vec<Term>,
    term_gain: Vec<HashSet<PointId>>,
    dirty_since: Vec<Option<usize>>,
    appointed_by: Vec<Option<NodeId>>,
    adjacency: Vec<HashSet<PointId>>,
    deg_by_level: Vec<Vec<u32>>,
    small_appointments: Vec<NodeId>,
}

/// Runs the bottom-up set computation over every level of `tree`.
///
/// Cross edges must already be present in `tree`.
pub fn compute_sets(tree: &NetTree, m: &Metric, params: &Params) -> Result<SurrogateTable, ConstructError> {
    let n = m.len();
    let max_k = n.saturating_sub(2);
    if params.k > max_k {
        return Err(ConstructError::KTooLarge {
            k: params.k,
            max: max_k,
        });
    }
    let placeholder = NodeState {
        set: SetId(u32::MAX),
        assignment: Assignment::Clean,
        dirty: false,
        descendants: Vec::new(),
        friends: Vec::new(),
        reserve: Vec::new(),
        appointer: None,
        term: None,
        is_host: false,
    };
    let mut b = Builder {
        tree,
        m,
        params,
        nodes: vec![placeholder; tree.len()],
        sets: SurrogateSets::default(),
        terms: Vec::new(),
        term_gain: Vec::new(),
        dirty_since: vec![None; n],
        appointed_by: vec![None; n],
        adjacency: vec![HashSet::new(); n],
        deg_by_level: Vec::new(),
        small_appointments: Vec::new(),
    };
    for i in 0..=tree.top_level() {
        b.friends_and_reserves(i);
        b.surrogates(i)?;
        b.cross_degrees(i);
    }
    Ok(SurrogateTable {
        params: params.clone(),
        nodes: b.nodes,
        sets: b.sets,
        terms: b.terms,
        dirty_since: b.dirty_since,
        appointed_by: b.appointed_by,
        deg_by_level: b.deg_by_level,
        small_appointments: b.small_appointments,
    })
}

impl Builder<'_> {
    fn clean(&self, p: PointId) -> bool {
        self.dirty_since[p].is_none()
    }

    fn is_friend(&self, x: NodeId, p: PointId, t: f64) -> bool {
        let node = self.tree.node(x);
        approx_le(self.m.dist(node.point, p), t * rad(node.level))
    }

    fn friends_and_reserves(&mut self, i: usize) {
        let tree = self.tree;
        let cap = self.params.friend_cap();
        let ids = tree.level(i);

        for &x in ids {
            let px = tree.node(x).point;
            let mut friends = Vec::with_capacity(cap);
            let mut reserve: HashMap<PointId, usize> = HashMap::new();
            let mut descendants = Vec::new();
            if i == 0 {
                friends.push(px);
                reserve.insert(px, 0);
                descendants.push(px);
                for &y in &tree.node(x).cross {
                    let q = tree.node(y).point;
                    reserve.insert(q, 0);
                    if friends.len() < cap && self.is_friend(x, q, 10.0) {
                        friends.push(q);
                    }
                }
            } else {
                let children = &tree.node(x).children;
                for &c in children {
                    let child = &self.nodes[c];
                    for e in &child.reserve {
                        if self.clean(e.point) {
                            let s = reserve.entry(e.point).or_insert(e.since);
                            *s = (*s).max(e.since);
                        }
                    }
                    for &f in &child.friends {
                        if self.clean(f) {
                            reserve.entry(f).or_insert(i - 1);
                        }
                    }
                    descendants.extend_from_slice(&child.descendants);
                }
                descendants.sort_unstable();
                for &c in children {
                    for &f in &self.nodes[c].friends {
                        if friends.len() == cap {
                            break;
                        }
                        if self.clean(f) && !friends.contains(&f) {
                            friends.push(f);
                        }
                    }
                }
                let mut pool: Vec<PointId> = reserve.keys().copied().collect();
                pool.sort_unstable();
                for r in pool {
                    if friends.len() == cap {
                        break;
                    }
                    if !friends.contains(&r) && self.is_friend(x, r, 10.0) {
                        friends.push(r);
                    }
                }
            }
            let mut reserve: Vec<ReserveEntry> = reserve
                .into_iter()
                .map(|(point, since)| ReserveEntry { point, since })
                .collect();
            reserve.sort_unstable_by_key(|e| e.point);
            let node = &mut self.nodes[x];
            node.friends = friends;
            node.reserve = reserve;
            node.descendants = descendants;
        }

        if i == 0 {
            for &x in ids {
                self.truncate_reserve(x, i);
            }
            return;
        }

        // Second pass: every cross neighbour shares its friends and the
        // 10-friends in its own reserve (as it stood after the first pass).
        let near: Vec<Vec<PointId>> = ids
            .iter()
            .map(|&y| {
                self.nodes[y]
                    .reserve
                    .iter()
                    .map(|e| e.point)
                    .filter(|&r| self.is_friend(y, r, 10.0))
                    .collect()
            })
            .collect();
        let pos: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(a, &y)| (y, a)).collect();
        for &x in ids {
            let mut added: Vec<PointId> = Vec::new();
            for &y in &tree.node(x).cross {
                added.extend(self.nodes[y].friends.iter().copied().filter(|&f| self.clean(f)));
                added.extend_from_slice(&near[pos[&y]]);
            }
            if !added.is_empty() {
                added.sort_unstable();
                added.dedup();
                let node = &mut self.nodes[x];
                let mut merged: HashMap<PointId, usize> =
                    node.reserve.iter().map(|e| (e.point, e.since)).collect();
                for p in added {
                    merged.insert(p, i);
                }
                node.reserve = merged
                    .into_iter()
                    .map(|(point, since)| ReserveEntry { point, since })
                    .collect();
                node.reserve.sort_unstable_by_key(|e| e.point);
            }
            self.truncate_reserve(x, i);
        }
    }

    /// Keeps reserve entries from the last `tau` levels and up to `3k+3`
    /// older 10-friends, then enforces the capacity by evicting the oldest.
    fn truncate_reserve(&mut self, x: NodeId, i: usize) {
        if self.params.reserve == ReservePolicy::Unbounded {
            return;
        }
        let cutoff = (i + 1).saturating_sub(self.params.tau);
        let cap = self.params.friend_cap();
        let entries = std::mem::take(&mut self.nodes[x].reserve);
        let (mut young, old): (Vec<_>, Vec<_>) = entries.into_iter().partition(|e| e.since >= cutoff);
        let mut kept_old: Vec<ReserveEntry> = old
            .into_iter()
            .filter(|e| self.is_friend(x, e.point, 10.0))
            .collect();
        kept_old.sort_unstable_by_key(|e| (Reverse(e.since), e.point));
        kept_old.truncate(cap);
        let room = self.params.reserve_capacity().saturating_sub(kept_old.len());
        if young.len() > room {
            young.sort_unstable_by_key(|e| (Reverse(e.since), e.point));
            young.truncate(room);
        }
        young.extend(kept_old);
        young.sort_unstable_by_key(|e| e.point);
        self.nodes[x].reserve = young;
    }

    fn surrogates(&mut self, i: usize) -> Result<(), ConstructError> {
        let tree = self.tree;
        let large = self.params.large();
        // Copies go first: their sets are fixed by their children, and they
        // must be visible as hosts before any large node at this level looks
        // for one. Then large nodes, then the rest.
        let mut order: Vec<NodeId> = tree.level(i).to_vec();
        order.sort_by_key(|&x| {
            (
                !(i > 0 && self.has_live_child(x, i)),
                self.nodes[x].friends.len() < large,
                tree.node(x).point,
            )
        });
        let mut hosts: Vec<NodeId> = Vec::new();

        for x in order {
            let mut child_dirty = false;
            if i > 0 {
                let children = &tree.node(x).children;
                child_dirty = children.iter().any(|&c| self.nodes[c].dirty);
                if child_dirty && self.inherit(x, i) {
                    hosts.push(x);
                    continue;
                }
            }
            if let Some(h) = self.find_host(x, &hosts) {
                let host = self.nodes[h].clone();
                let node = &mut self.nodes[x];
                node.set = host.set;
                node.dirty = true;
                node.term = host.term;
                node.appointer = host.appointer;
                node.assignment = Assignment::Leech(h);
                self.nodes[h].is_host = true;
                continue;
            }
            if !child_dirty && self.nodes[x].friends.len() < large {
                let set = self.sets.intern(self.nodes[x].descendants.clone());
                let node = &mut self.nodes[x];
                node.set = set;
                node.assignment = Assignment::Clean;
                continue;
            }
            self.appoint(x, i)?;
            hosts.push(x);
        }
        Ok(())
    }

    fn has_live_child(&self, x: NodeId, i: usize) -> bool {
        let tau = self.params.tau;
        self.tree.node(x).children.iter().any(|&c| {
            let s = &self.nodes[c];
            s.dirty && !s.is_leech() && !self.terms[s.term.expect("dirty node has a term")].over_at(i - 1, tau)
        })
    }

    /// Re-uses the set of the dirty non-leech child whose term started most
    /// recently among those not over; the terms of the other such children
    /// end here.
    fn inherit(&mut self, x: NodeId, i: usize) -> bool {
        let tree = self.tree;
        let tau = self.params.tau;
        let live: Vec<NodeId> = tree
            .node(x)
            .children
            .iter()
            .copied()
            .filter(|&c| {
                let s = &self.nodes[c];
                s.dirty && !s.is_leech() && !self.terms[s.term.expect("dirty node has a term")].over_at(i - 1, tau)
            })
            .collect();
        let Some(&chosen) = live.iter().max_by_key(|&&c| {
            let t = self.nodes[c].term.unwrap();
            (self.terms[t].start_level, Reverse(tree.node(c).point))
        }) else {
            return false;
        };
        let chosen_term = self.nodes[chosen].term.unwrap();
        for &c in &live {
            let t = self.nodes[c].term.unwrap();
            if t != chosen_term {
                self.terms[t].forced_over_at = Some(i - 1);
            }
        }
        let from = self.nodes[chosen].clone();
        let node = &mut self.nodes[x];
        node.set = from.set;
        node.dirty = true;
        node.term = from.term;
        node.appointer = from.appointer;
        node.assignment = Assignment::Inherited(chosen);
        true
    }

    /// Nearest already processed dirty non-leech within `24 * 5^i`.
    fn find_host(&self, x: NodeId, hosts: &[NodeId]) -> Option<NodeId> {
        let px = self.tree.node(x).point;
        let reach = 24.0 * rad(self.tree.node(x).level);
        hosts
            .iter()
            .map(|&h| (self.m.dist(px, self.tree.node(h).point), self.tree.node(h).point, h))
            .filter(|&(d, _, _)| approx_le(d, reach))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, _, h)| h)
    }

    fn appoint(&mut self, x: NodeId, i: usize) -> Result<(), ConstructError> {
        let k = self.params.k;
        let friends = &self.nodes[x].friends;
        let mut candidates: Vec<PointId> = friends.iter().copied().filter(|&p| self.clean(p)).collect();
        if candidates.len() < k + 1 {
            return Err(ConstructError::InsufficientFriends {
                point: self.tree.node(x).point,
                level: i,
                need: k + 1,
                have: candidates.len(),
                friends: friends.clone(),
            });
        }
        if friends.len() < self.params.large() {
            debug!(
                "node ({}, {i}) appoints with only {} friends",
                self.tree.node(x).point,
                friends.len()
            );
            self.small_appointments.push(x);
        }
        candidates.sort_by_key(|&p| (self.adjacency[p].len(), p));
        candidates.truncate(k + 1);
        for &p in &candidates {
            self.dirty_since[p] = Some(i);
            self.appointed_by[p] = Some(x);
        }
        let set = self.sets.intern(candidates);
        let term = self.terms.len();
        self.terms.push(Term {
            set,
            appointer: x,
            start_level: i,
            gained: 0,
            phase_one_end: None,
            forced_over_at: None,
        });
        self.term_gain.push(HashSet::new());
        let node = &mut self.nodes[x];
        node.set = set;
        node.dirty = true;
        node.term = Some(term);
        node.appointer = Some(x);
        node.assignment = Assignment::Appointed;
        Ok(())
    }

    /// Applies the non-redundant level-`i` cross edges to the degree
    /// counters and to the terms of the surrogate sets they touch.
    fn cross_degrees(&mut self, i: usize) {
        let k = self.params.k;
        let mut touched: Vec<TermId> = Vec::new();
        for &(a, b) in self.tree.cross_edges(i) {
            let (sa, sb) = (self.nodes[a].set, self.nodes[b].set);
            if sa == sb {
                continue;
            }
            let (pa, pb) = (self.sets.get(sa).to_vec(), self.sets.get(sb).to_vec());
            for &u in &pa {
                for &v in &pb {
                    if u != v {
                        self.adjacency[u].insert(v);
                        self.adjacency[v].insert(u);
                    }
                }
            }
            for (x, other) in [(a, &pb), (b, &pa)] {
                if let Some(t) = self.nodes[x].term {
                    self.term_gain[t].extend(other.iter().copied());
                    touched.push(t);
                }
            }
        }
        for t in touched {
            let gained = self.term_gain[t].len();
            let term = &mut self.terms[t];
            term.gained = gained;
            if term.phase_one_end.is_none() && gained > k {
                term.phase_one_end = Some(i);
            }
        }
        self.deg_by_level
            .push(self.adjacency.iter().map(|s| s.len() as u32).collect());
    }
}
