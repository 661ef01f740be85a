use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::metric::{Metric, PointId, REL_TOL};
use crate::spanner::FtSpanner;

#[derive(Clone, Copy, PartialEq)]
struct State(f64, usize);

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths over `adj`, skipping vertices in `removed`.
pub fn dijkstra(adj: &[Vec<(PointId, f64)>], source: PointId, removed: &[bool]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(State(0.0, source));
    while let Some(State(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(u, w) in &adj[v] {
            if removed[u] {
                continue;
            }
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(State(nd, u));
            }
        }
    }
    dist
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub u: PointId,
    pub v: PointId,
    /// `f64::INFINITY` when the pair is disconnected.
    pub stretch: f64,
    pub faults: Vec<PointId>,
}

/// Worst ratio of spanner distance to metric distance over all pairs of
/// surviving points after removing `faults`.
pub fn check_stretch(sp: &FtSpanner, m: &Metric, faults: &[PointId]) -> Option<Witness> {
    let adj = sp.adjacency();
    worst_stretch(&adj, m, faults)
}

fn worst_stretch(adj: &[Vec<(PointId, f64)>], m: &Metric, faults: &[PointId]) -> Option<Witness> {
    let n = m.len();
    let mut removed = vec![false; n];
    for &f in faults {
        removed[f] = true;
    }
    let mut worst: Option<Witness> = None;
    for s in 0..n {
        if removed[s] {
            continue;
        }
        let dist = dijkstra(adj, s, &removed);
        for t in s + 1..n {
            if removed[t] {
                continue;
            }
            let ratio = dist[t] / m.dist(s, t);
            if worst.as_ref().is_none_or(|w| ratio > w.stretch) {
                worst = Some(Witness {
                    u: s,
                    v: t,
                    stretch: ratio,
                    faults: faults.to_vec(),
                });
            }
        }
    }
    worst
}

/// True when `stretch <= 1 + eps` up to the shared relative tolerance.
pub fn within(stretch: f64, eps: f64) -> bool {
    stretch <= (1.0 + eps) * (1.0 + REL_TOL)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaultStrategy {
    Exhaustive,
    Random { trials: usize, seed: u64 },
    Targeted,
}

impl std::str::FromStr for FaultStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(FaultStrategy::Exhaustive),
            "targeted" => Ok(FaultStrategy::Targeted),
            _ => match s.strip_prefix("random:") {
                Some(t) => t
                    .parse()
                    .map(|trials| FaultStrategy::Random { trials, seed: 0 })
                    .map_err(|e| format!("bad trial count {t:?}: {e}")),
                None => Err(format!("unknown fault strategy {s:?}")),
            },
        }
    }
}

/// Largest number of fault sets the exhaustive strategy will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 2_000_000;

/// `sum_{j <= k} C(n, j)`, saturating.
pub fn fault_set_count(n: usize, k: usize) -> u64 {
    let mut total = 0u64;
    let mut c = 1u64;
    for j in 0..=k.min(n) {
        total = total.saturating_add(c);
        c = c.saturating_mul((n - j) as u64) / (j as u64 + 1);
    }
    total
}

/// All subsets of `0..n` with at most `k` elements, smallest first.
pub fn all_fault_sets(n: usize, k: usize) -> Vec<Vec<PointId>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..k.min(n) {
        let mut next = Vec::new();
        for set in &frontier {
            let start = set.last().map_or(0, |&l: &PointId| l + 1);
            for p in start..n {
                let mut s = set.clone();
                s.push(p);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Extra information that sharpens the targeted strategy.
#[derive(Clone, Debug, Default)]
pub struct Hints {
    /// How many nodes use each point as a surrogate.
    pub surrogate_use: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub tested: usize,
    pub passed: bool,
    pub worst: Option<Witness>,
}

pub fn fault_suite(
    sp: &FtSpanner,
    m: &Metric,
    eps: f64,
    k: usize,
    strategy: &FaultStrategy,
    hints: &Hints,
) -> Result<SuiteResult, String> {
    let adj = sp.adjacency();
    let n = m.len();
    let k = k.min(n.saturating_sub(2));
    let sets = match strategy {
        FaultStrategy::Exhaustive => {
            let count = fault_set_count(n, k);
            if count > EXHAUSTIVE_LIMIT {
                return Err(format!(
                    "exhaustive enumeration needs {count} fault sets (limit {EXHAUSTIVE_LIMIT})"
                ));
            }
            all_fault_sets(n, k)
        }
        FaultStrategy::Random { trials, seed } => random_fault_sets(n, k, *trials, *seed),
        FaultStrategy::Targeted => {
            let mut sets = targeted_fault_sets(sp, &adj, m, k, hints);
            sets.extend(greedy_damage(&adj, m, k));
            sets
        }
    };
    Ok(run_sets(&adj, m, eps, sets))
}

fn run_sets(adj: &[Vec<(PointId, f64)>], m: &Metric, eps: f64, sets: Vec<Vec<PointId>>) -> SuiteResult {
    let tested = sets.len();
    let worst = sets
        .par_iter()
        .enumerate()
        .filter_map(|(i, f)| worst_stretch(adj, m, f).map(|w| (i, w)))
        .reduce_with(|a, b| {
            if b.1.stretch > a.1.stretch || (b.1.stretch == a.1.stretch && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .map(|(_, w)| w);
    let passed = worst.as_ref().is_none_or(|w| within(w.stretch, eps));
    SuiteResult { tested, passed, worst }
}

/// The empty set plus `trials` uniform samples of `k` points.
pub fn random_fault_sets(n: usize, k: usize, trials: usize, seed: u64) -> Vec<Vec<PointId>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Vec::new()];
    if k == 0 {
        return out;
    }
    for _ in 0..trials {
        let mut s = sample(&mut rng, n, k).into_vec();
        s.sort_unstable();
        out.push(s);
    }
    out
}

fn top_k(scores: &[usize], k: usize) -> Vec<PointId> {
    let mut idx: Vec<PointId> = (0..scores.len()).collect();
    idx.sort_by_key(|&p| (std::cmp::Reverse(scores[p]), p));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Heuristic fault sets: highest spanner degree, most used surrogates, and
/// for every vertex the `k` neighbours its shortest-path tree leans on most.
fn targeted_fault_sets(
    sp: &FtSpanner,
    adj: &[Vec<(PointId, f64)>],
    m: &Metric,
    k: usize,
    hints: &Hints,
) -> Vec<Vec<PointId>> {
    let n = m.len();
    let mut out = vec![Vec::new()];
    if k == 0 {
        return out;
    }
    out.push(top_k(&sp.degrees(), k));
    if let Some(use_count) = &hints.surrogate_use {
        out.push(top_k(use_count, k));
    }
    let none = vec![false; n];
    for s in 0..n {
        let dist = dijkstra(adj, s, &none);
        // Count, per neighbour of s, how many targets are reached through it.
        let mut through = vec![0usize; n];
        for t in 0..n {
            if t == s || !dist[t].is_finite() {
                continue;
            }
            let mut v = t;
            loop {
                let pred = adj[v]
                    .iter()
                    .filter(|&&(u, w)| (dist[u] + w - dist[v]).abs() <= 1e-12 * dist[v].max(1.0))
                    .map(|&(u, _)| u)
                    .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
                match pred {
                    Some(u) if u == s => {
                        through[v] += 1;
                        break;
                    }
                    Some(u) => v = u,
                    None => break,
                }
            }
        }
        let set: Vec<PointId> = top_k(&through, k).into_iter().filter(|&p| through[p] > 0).collect();
        if !set.is_empty() {
            out.push(set);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Builds one fault set by repeatedly removing the point whose removal
/// hurts the worst stretch the most.
fn greedy_damage(adj: &[Vec<(PointId, f64)>], m: &Metric, k: usize) -> Vec<Vec<PointId>> {
    let n = m.len();
    let mut chosen: Vec<PointId> = Vec::new();
    let mut out = Vec::new();
    for _ in 0..k {
        let best = (0..n)
            .into_par_iter()
            .filter(|p| !chosen.contains(p))
            .map(|p| {
                let mut f = chosen.clone();
                f.push(p);
                let s = worst_stretch(adj, m, &f).map_or(1.0, |w| w.stretch);
                (s, p)
            })
            .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
        match best {
            Some((_, p)) => chosen.push(p),
            None => break,
        }
        let mut s = chosen.clone();
        s.sort_unstable();
        out.push(s);
    }
    out
}
