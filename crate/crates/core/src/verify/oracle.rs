//! Greedy fault-tolerant spanner used as a baseline.

use crate::metric::{Metric, PointId};
use crate::spanner::{EdgeKind, FtSpanner};

/// Largest input the oracle accepts.
pub const ORACLE_MAX_N: usize = 150;

struct Arc {
    to: usize,
    cap: i32,
    cost: f64,
}

/// Min-cost flow on a small residual graph, enough to pull out a handful
/// of vertex-disjoint paths.
struct Flow {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Flow {
    fn new(nodes: usize) -> Self {
        Flow {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i32, cost: f64) {
        self.out[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap, cost });
        self.out[to].push(self.arcs.len());
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
    }

    /// Pushes up to `units` units along successive cheapest augmenting paths.
    fn augment(&mut self, s: usize, t: usize, units: usize) -> usize {
        let n = self.out.len();
        let mut pushed = 0;
        while pushed < units {
            // Bellman-Ford: residual costs can be negative.
            let mut dist = vec![f64::INFINITY; n];
            let mut via = vec![usize::MAX; n];
            dist[s] = 0.0;
            for _ in 0..n {
                let mut changed = false;
                for v in 0..n {
                    if !dist[v].is_finite() {
                        continue;
                    }
                    for &a in &self.out[v] {
                        let arc = &self.arcs[a];
                        if arc.cap > 0 && dist[v] + arc.cost < dist[arc.to] - 1e-12 {
                            dist[arc.to] = dist[v] + arc.cost;
                            via[arc.to] = a;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if !dist[t].is_finite() {
                break;
            }
            let mut v = t;
            while v != s {
                let a = via[v];
                self.arcs[a].cap -= 1;
                self.arcs[a ^ 1].cap += 1;
                v = self.arcs[a ^ 1].to;
            }
            pushed += 1;
        }
        pushed
    }
}

/// Whether the current graph already holds `count` internally vertex-disjoint
/// `x`-`y` paths of weight at most `limit` each. Paths are searched inside the
/// ball of points `v` with `d(x,v) + d(v,y) <= limit`; a negative answer may be
/// conservative, a positive one is always backed by explicit paths.
fn has_disjoint_paths(
    adj: &[Vec<(PointId, f64)>],
    m: &Metric,
    x: PointId,
    y: PointId,
    count: usize,
    limit: f64,
) -> bool {
    let n = m.len();
    let slack = limit * (1.0 + 1e-12);
    let inside: Vec<bool> = (0..n).map(|v| m.dist(x, v) + m.dist(v, y) <= slack).collect();
    // Node v splits into v_in = 2v and v_out = 2v + 1.
    let mut flow = Flow::new(2 * n);
    for v in 0..n {
        if !inside[v] {
            continue;
        }
        let cap = if v == x || v == y { count as i32 } else { 1 };
        flow.add(2 * v, 2 * v + 1, cap, 0.0);
        for &(u, w) in &adj[v] {
            if inside[u] {
                flow.add(2 * v + 1, 2 * u, 1, w);
            }
        }
    }
    if flow.augment(2 * x + 1, 2 * y, count) < count {
        return false;
    }
    // Decompose the flow and check every path length.
    let mut used: Vec<i32> = (0..flow.arcs.len())
        .map(|a| if a % 2 == 0 { flow.arcs[a ^ 1].cap } else { 0 })
        .collect();
    for _ in 0..count {
        let mut v = 2 * x + 1;
        let mut length = 0.0;
        let mut steps = 0;
        while v != 2 * y {
            let Some(&a) = flow.out[v].iter().find(|&&a| a % 2 == 0 && used[a] > 0) else {
                return false;
            };
            used[a] -= 1;
            length += flow.arcs[a].cost;
            v = flow.arcs[a].to;
            steps += 1;
            if steps > 4 * n {
                return false;
            }
        }
        if length > slack {
            return false;
        }
    }
    true
}

/// Greedy `k`-fault-tolerant `t`-spanner: scan pairs by increasing distance
/// and keep an edge unless `k+1` disjoint short paths already exist.
pub fn greedy_ft_oracle(m: &Metric, t: f64, k: usize) -> FtSpanner {
    let n = m.len();
    assert!(n <= ORACLE_MAX_N, "oracle limited to {ORACLE_MAX_N} points");
    let mut pairs: Vec<(f64, PointId, PointId)> = Vec::with_capacity(n * n / 2);
    for u in 0..n {
        for v in u + 1..n {
            pairs.push((m.dist(u, v), u, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut sp = FtSpanner::new(n);
    let mut adj: Vec<Vec<(PointId, f64)>> = vec![Vec::new(); n];
    for (d, u, v) in pairs {
        if !has_disjoint_paths(&adj, m, u, v, k + 1, t * d) {
            sp.insert(u, v, d, EdgeKind::CrossClique, 0);
            adj[u].push((v, d));
            adj[v].push((u, d));
        }
    }
    sp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::stretch::dijkstra;

    /// Textbook greedy spanner: add an edge when the current distance is too long.
    fn classic_greedy(m: &Metric, t: f64) -> Vec<(usize, usize)> {
        let n = m.len();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                pairs.push((m.dist(u, v), u, v));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut adj = vec![Vec::new(); n];
        let mut out = Vec::new();
        let none = vec![false; n];
        for (d, u, v) in pairs {
            if dijkstra(&adj, u, &none)[v] > t * d * (1.0 + 1e-12) {
                adj[u].push((v, d));
                adj[v].push((u, d));
                out.push((u, v));
            }
        }
        out
    }

    #[test]
    fn k_zero_matches_classic_greedy_on_convex_position() {
        let pts: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 5.0 + 0.1 * i as f64;
                vec![10.0 * a.cos(), 10.0 * a.sin()]
            })
            .collect();
        let m = Metric::from_points(pts).unwrap();
        for t in [1.1, 1.5, 2.0] {
            let sp = greedy_ft_oracle(&m, t, 0);
            let mut got: Vec<(usize, usize)> = sp.edges().iter().map(|e| (e.u, e.v)).collect();
            let mut want = classic_greedy(&m, t);
            got.sort_unstable();
            want.sort_unstable();
            assert_eq!(got, want, "t = {t}");
        }
    }

    #[test]
    fn k_zero_matches_classic_greedy_on_random_sets() {
        for seed in 0..3 {
            let m = crate::gen::uniform_plane(25, seed);
            let sp = greedy_ft_oracle(&m, 1.5, 0);
            assert_eq!(sp.len(), classic_greedy(&m, 1.5).len());
        }
    }

    #[test]
    fn maximal_k_gives_complete_graph() {
        let m = crate::gen::uniform_plane(7, 1);
        let sp = greedy_ft_oracle(&m, 2.0, 5);
        assert_eq!(sp.len(), 7 * 6 / 2);
    }

    #[test]
    fn line_with_one_fault() {
        // Any two points of a line at distance 1 apart with k = 1 and a generous
        // stretch need at least two disjoint routes.
        let m = crate::gen::line(6);
        let sp = greedy_ft_oracle(&m, 3.0, 1);
        let r = crate::verify::stretch::fault_suite(
            &sp,
            &m,
            2.0,
            1,
            &crate::verify::stretch::FaultStrategy::Exhaustive,
            &Default::default(),
        )
        .unwrap();
        assert!(r.passed);
        assert!(sp.len() >= 6);
    }
}
