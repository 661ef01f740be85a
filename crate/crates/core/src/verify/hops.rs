use rayon::prelude::*;
use serde::Serialize;

use crate::metric::{Metric, PointId, REL_TOL};
use crate::spanner::FtSpanner;

/// Default hop cap `4 * ceil(log2 n) + 8`.
pub fn default_hop_cap(n: usize) -> usize {
    4 * (n.max(2) as f64).log2().ceil() as usize + 8
}

/// Diameter, worst pair and over-cap pairs seen from one source.
type SourceHops = (usize, Option<(PointId, PointId)>, Vec<(PointId, PointId)>);

#[derive(Clone, Debug, Serialize)]
pub struct HopReport {
    /// Largest hop count needed by any pair that succeeded within the cap.
    pub diameter: usize,
    pub worst_pair: Option<(PointId, PointId)>,
    /// Pairs with no `(1+eps)`-path of at most `cap` edges.
    pub exceeded: Vec<(PointId, PointId)>,
    pub cap: usize,
    pub sources: usize,
}

/// For each pair, the fewest edges on a path of weight at most
/// `(1+eps) * dist`, via hop-layered relaxation. `sources` limits the
/// computation to the given source points; `None` means all points.
pub fn measure_hop_diameter(
    sp: &FtSpanner,
    m: &Metric,
    eps: f64,
    cap: usize,
    sources: Option<&[PointId]>,
) -> HopReport {
    let n = m.len();
    let mut edges: Vec<(PointId, PointId, f64)> = Vec::with_capacity(2 * sp.len());
    for e in sp.edges() {
        edges.push((e.u, e.v, e.w));
        edges.push((e.v, e.u, e.w));
    }
    let all: Vec<PointId> = (0..n).collect();
    let sources = sources.unwrap_or(&all);
    let per_source: Vec<SourceHops> = sources
        .par_iter()
        .map(|&s| hops_from(&edges, m, eps, cap, s))
        .collect();
    let mut report = HopReport {
        diameter: 0,
        worst_pair: None,
        exceeded: Vec::new(),
        cap,
        sources: sources.len(),
    };
    for (d, pair, ex) in per_source {
        if d > report.diameter {
            report.diameter = d;
            report.worst_pair = pair;
        }
        report.exceeded.extend(ex);
    }
    report
}

fn hops_from(
    edges: &[(PointId, PointId, f64)],
    m: &Metric,
    eps: f64,
    cap: usize,
    s: PointId,
) -> SourceHops {
    let n = m.len();
    let target: Vec<f64> = (0..n)
        .map(|t| (1.0 + eps) * m.dist(s, t) * (1.0 + REL_TOL))
        .collect();
    let mut done = vec![false; n];
    done[s] = true;
    let mut open = n - 1;
    let mut cur = vec![f64::INFINITY; n];
    cur[s] = 0.0;
    let mut worst = 0;
    let mut worst_pair = None;
    let mut h = 0;
    while open > 0 && h < cap {
        h += 1;
        let mut next = cur.clone();
        for &(u, v, w) in edges {
            let d = cur[u] + w;
            if d < next[v] {
                next[v] = d;
            }
        }
        cur = next;
        for t in 0..n {
            if !done[t] && cur[t] <= target[t] {
                done[t] = true;
                open -= 1;
                if h > worst {
                    worst = h;
                    worst_pair = Some((s, t));
                }
            }
        }
    }
    let exceeded = (0..n).filter(|&t| !done[t]).map(|t| (s, t)).collect();
    (worst, worst_pair, exceeded)
}
