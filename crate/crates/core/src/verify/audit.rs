use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::construct::{Assignment, SetId, SurrogateTable};
use crate::metric::{approx_le, Metric, PointId};
use crate::net_tree::{rad, NetTree, NodeId};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finding {
    pub invariant: u8,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invariant {}: {}", self.invariant, self.message)
    }
}

struct Auditor<'a> {
    tree: &'a NetTree,
    m: &'a Metric,
    table: &'a SurrogateTable,
    out: Vec<Finding>,
}

impl Auditor<'_> {
    fn report(&mut self, invariant: u8, message: String) {
        self.out.push(Finding { invariant, message });
    }

    fn name(&self, x: NodeId) -> String {
        self.tree.node(x).to_string()
    }

    fn near(&self, x: NodeId, p: PointId, t: f64) -> bool {
        let node = self.tree.node(x);
        approx_le(self.m.dist(node.point, p), t * rad(node.level))
    }
}

/// Checks the structural invariants of a finished set computation.
///
/// 1. dirty nodes have exactly `k+1` surrogates and dirty parents;
/// 2. clean nodes have `S = D ⊆ F` and `|F ∪ S| < 2k+2`;
/// 3. descendant points of a clean node are clean at its level;
/// 4. same-level dirty non-leeches have disjoint surrogates and disjoint
///    friend sets of their appointing copies;
/// 5. a dirty set and any set used at the same or a higher level are equal or disjoint;
/// 6. surrogates are 34-friends, friends 10-friends, reserve points (γ+10)-friends;
/// 7. surrogates of clean `j`-level nodes have `deg_j <= D`, and every final degree is `<= 2D`;
/// 8. no ancestor within `τ+2` levels of an appointing node appoints;
/// 9. leech hosts are dirty non-leech 24-friends whose parents are 24-friends of the leech's parent;
/// 10. no point is appointed twice.
pub fn structural_audit(tree: &NetTree, m: &Metric, table: &SurrogateTable) -> Vec<Finding> {
    let mut a = Auditor {
        tree,
        m,
        table,
        out: Vec::new(),
    };
    a.dirty_sizes();
    a.clean_nodes();
    a.disjoint_non_leeches();
    a.equal_or_disjoint();
    a.radii();
    a.degrees();
    a.appointment_spacing();
    a.leeches();
    a.reappointment();
    a.out
}

impl Auditor<'_> {
    // 1
    fn dirty_sizes(&mut self) {
        let k = self.table.params.k;
        for x in 0..self.tree.len() {
            let s = &self.table.nodes[x];
            if !s.dirty {
                continue;
            }
            let size = self.table.surrogates(x).len();
            if size != k + 1 {
                self.report(1, format!("dirty {} has {size} surrogates", self.name(x)));
            }
            if let Some(p) = self.tree.node(x).parent {
                if !self.table.nodes[p].dirty {
                    self.report(1, format!("dirty {} has clean parent {}", self.name(x), self.name(p)));
                }
            }
        }
    }

    // 2 and 3
    fn clean_nodes(&mut self) {
        let k = self.table.params.k;
        for x in 0..self.tree.len() {
            let s = &self.table.nodes[x];
            if s.dirty {
                continue;
            }
            let level = self.tree.node(x).level;
            let sur = self.table.surrogates(x);
            if sur != s.descendants.as_slice() {
                self.report(2, format!("clean {} has S != D", self.name(x)));
            }
            let mut union: HashSet<PointId> = s.friends.iter().copied().collect();
            union.extend(sur.iter().copied());
            if !s.descendants.iter().all(|p| s.friends.contains(p)) {
                self.report(2, format!("clean {} has D not inside F", self.name(x)));
            }
            if union.len() >= 2 * k + 2 {
                self.report(2, format!("clean {} has |F ∪ S| = {}", self.name(x), union.len()));
            }
            for &p in &s.descendants {
                if self.table.dirty_since[p].is_some_and(|d| d <= level) {
                    self.report(3, format!("clean {} has point {p} dirty since level {}", self.name(x), self.table.dirty_since[p].unwrap()));
                }
            }
        }
    }

    // 4
    fn disjoint_non_leeches(&mut self) {
        for i in 0..=self.tree.top_level() {
            let mut owner: HashMap<PointId, NodeId> = HashMap::new();
            let mut friend_owner: HashMap<PointId, NodeId> = HashMap::new();
            for &x in self.tree.level(i) {
                let s = &self.table.nodes[x];
                if !s.dirty || s.is_leech() {
                    continue;
                }
                for &p in self.table.surrogates(x) {
                    if let Some(&y) = owner.get(&p) {
                        self.report(4, format!("{} and {} share surrogate {p}", self.name(y), self.name(x)));
                    }
                    owner.insert(p, x);
                }
                let Some(ax) = s.appointer else {
                    self.report(4, format!("dirty {} has no appointing copy", self.name(x)));
                    continue;
                };
                for &p in &self.table.nodes[ax].friends {
                    if let Some(&y) = friend_owner.get(&p) {
                        if y != x {
                            self.report(
                                4,
                                format!("appointing copies of {} and {} share friend {p}", self.name(y), self.name(x)),
                            );
                        }
                    }
                    friend_owner.insert(p, x);
                }
            }
        }
    }

    // 5
    fn equal_or_disjoint(&mut self) {
        // Per set: lowest level at which a dirty node uses it, highest level at
        // which any node uses it.
        let mut lowest_dirty: HashMap<SetId, usize> = HashMap::new();
        let mut highest: HashMap<SetId, usize> = HashMap::new();
        for x in 0..self.tree.len() {
            let s = &self.table.nodes[x];
            let level = self.tree.node(x).level;
            let h = highest.entry(s.set).or_insert(level);
            *h = (*h).max(level);
            if s.dirty {
                let l = lowest_dirty.entry(s.set).or_insert(level);
                *l = (*l).min(level);
            }
        }
        let mut by_point: HashMap<PointId, Vec<SetId>> = HashMap::new();
        for &set in highest.keys() {
            for &p in self.table.sets.get(set) {
                by_point.entry(p).or_default().push(set);
            }
        }
        let mut seen: HashSet<(SetId, SetId)> = HashSet::new();
        let mut points: Vec<_> = by_point.into_iter().collect();
        points.sort_unstable_by_key(|(p, _)| *p);
        for (p, sets) in points {
            for &a in &sets {
                let Some(&low) = lowest_dirty.get(&a) else {
                    continue;
                };
                for &b in &sets {
                    if a != b && highest[&b] >= low && seen.insert((a, b)) {
                        self.report(
                            5,
                            format!("dirty set {:?} and set {:?} overlap in point {p} without being equal", self.table.sets.get(a), self.table.sets.get(b)),
                        );
                    }
                }
            }
        }
    }

    // 6
    fn radii(&mut self) {
        let gamma = self.table.params.gamma;
        for x in 0..self.tree.len() {
            let s = &self.table.nodes[x];
            for &p in self.table.surrogates(x) {
                if !self.near(x, p, 34.0) {
                    self.report(6, format!("surrogate {p} of {} is not a 34-friend", self.name(x)));
                }
            }
            for &p in &s.friends {
                if !self.near(x, p, 10.0) {
                    self.report(6, format!("friend {p} of {} is not a 10-friend", self.name(x)));
                }
            }
            for e in &s.reserve {
                if !self.near(x, e.point, gamma + 10.0) {
                    self.report(6, format!("reserve point {} of {} is too far", e.point, self.name(x)));
                }
            }
        }
    }

    // 7
    fn degrees(&mut self) {
        let d = self.table.params.degree_threshold;
        for x in 0..self.tree.len() {
            if self.table.nodes[x].dirty {
                continue;
            }
            let j = self.tree.node(x).level;
            for &p in self.table.surrogates(x) {
                let deg = u64::from(self.table.deg_by_level[j][p]);
                if deg > d {
                    self.report(7, format!("surrogate {p} of clean {} has degree {deg} > {d}", self.name(x)));
                }
            }
        }
        for p in 0..self.m.len() {
            let deg = u64::from(self.table.final_degree(p));
            if deg > 2 * d {
                self.report(7, format!("point {p} ends with degree {deg} > 2D = {}", 2 * d));
            }
        }
    }

    // 8
    fn appointment_spacing(&mut self) {
        let tau = self.table.params.tau;
        for x in 0..self.tree.len() {
            if self.table.nodes[x].assignment != Assignment::Appointed {
                continue;
            }
            let i = self.tree.node(x).level;
            let mut cur = self.tree.node(x).parent;
            while let Some(y) = cur {
                if self.tree.node(y).level > i + tau + 2 {
                    break;
                }
                if self.table.nodes[y].assignment == Assignment::Appointed {
                    self.report(8, format!("{} appoints within τ+2 levels of {}", self.name(y), self.name(x)));
                }
                cur = self.tree.node(y).parent;
            }
        }
    }

    // 9
    fn leeches(&mut self) {
        for x in 0..self.tree.len() {
            let Some(h) = self.table.nodes[x].host() else {
                continue;
            };
            let hs = &self.table.nodes[h];
            let (nx, nh) = (self.tree.node(x), self.tree.node(h));
            if !hs.dirty || hs.is_leech() {
                self.report(9, format!("host {} of {} is not a dirty non-leech", self.name(h), self.name(x)));
            }
            if nx.level != nh.level || !self.near(x, nh.point, 24.0) {
                self.report(9, format!("host {} of {} is not a same-level 24-friend", self.name(h), self.name(x)));
            }
            if hs.set != self.table.nodes[x].set {
                self.report(9, format!("leech {} does not use the set of host {}", self.name(x), self.name(h)));
            }
            if let (Some(px), Some(ph)) = (nx.parent, nh.parent) {
                if !self.near(px, self.tree.node(ph).point, 24.0) {
                    self.report(
                        9,
                        format!("parents {} and {} of leech and host are not 24-friends", self.name(px), self.name(ph)),
                    );
                }
            }
        }
    }

    // 10
    fn reappointment(&mut self) {
        let mut by: HashMap<PointId, NodeId> = HashMap::new();
        for x in 0..self.tree.len() {
            if self.table.nodes[x].assignment != Assignment::Appointed {
                continue;
            }
            for &p in self.table.surrogates(x) {
                if let Some(&y) = by.get(&p) {
                    self.report(10, format!("point {p} appointed by {} and again by {}", self.name(y), self.name(x)));
                }
                by.insert(p, x);
                if self.table.appointed_by[p] != Some(x) {
                    self.report(10, format!("point {p} of {} is registered to another appointment", self.name(x)));
                }
            }
        }
    }
}
