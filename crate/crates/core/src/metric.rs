//! Finite metrics: loading, the distance oracle, normalization, diameter and
//! MST weight.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Index of a point in `0..n`.
pub type PointId = usize;

/// Relative slack used for every "within t * 5^i" style comparison.
pub const REL_TOL: f64 = 1e-9;

/// `a <= b` up to the relative tolerance [`REL_TOL`].
#[inline]
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * b.abs().max(1.0)
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("point {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("matrix is not symmetric: worst pair ({i}, {j}) differs by {diff}")]
    Asymmetric { i: usize, j: usize, diff: f64 },
    #[error("invalid matrix entry at ({i}, {j}): {value}")]
    InvalidEntry { i: usize, j: usize, value: f64 },
    #[error("points {a} and {b} coincide")]
    Coincident { a: usize, b: usize },
    #[error("empty input")]
    Empty,
}

/// How a point file is interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputMode {
    Euclidean,
    Matrix,
}

#[derive(Clone, Debug)]
enum Repr {
    Euclidean { coords: Vec<Vec<f64>> },
    Matrix { n: usize, data: Vec<f64> },
}

/// A finite metric space on points `0..n`.
///
/// Distances are stored raw and divided by `scale` on access, so normalizing
/// never perturbs coordinates.
#[derive(Clone, Debug)]
pub struct Metric {
    repr: Repr,
    scale: f64,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Euclidean { coords } => {
                format!("euclidean(dim={})", coords.first().map_or(0, Vec::len))
            }
            Repr::Matrix { .. } => "matrix".to_string(),
        };
        write!(f, "{kind} metric, n={}, scale={}", self.len(), self.scale)
    }
}

impl Metric {
    /// Euclidean metric over coordinate tuples. All tuples must share a dimension.
    pub fn from_points(coords: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        if coords.is_empty() {
            return Err(MetricError::Empty);
        }
        let dim = coords[0].len();
        for (index, c) in coords.iter().enumerate() {
            if c.len() != dim {
                return Err(MetricError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: c.len(),
                });
            }
            if let Some(&v) = c.iter().find(|v| !v.is_finite()) {
                return Err(MetricError::InvalidEntry {
                    i: index,
                    j: index,
                    value: v,
                });
            }
        }
        let m = Metric {
            repr: Repr::Euclidean { coords },
            scale: 1.0,
        };
        m.check_distinct()?;
        Ok(m)
    }

    /// Explicit metric from a row-major `n * n` matrix.
    pub fn from_matrix(n: usize, data: Vec<f64>) -> Result<Self, MetricError> {
        if n == 0 {
            return Err(MetricError::Empty);
        }
        assert_eq!(data.len(), n * n, "matrix data must have n*n entries");
        let mut worst: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() || v < 0.0 || (i == j && v != 0.0) {
                    return Err(MetricError::InvalidEntry { i, j, value: v });
                }
                if j > i {
                    let diff = (v - data[j * n + i]).abs();
                    if diff > REL_TOL * v.abs().max(1.0) && worst.is_none_or(|w| diff > w.2) {
                        worst = Some((i, j, diff));
                    }
                }
            }
        }
        if let Some((i, j, diff)) = worst {
            return Err(MetricError::Asymmetric { i, j, diff });
        }
        let m = Metric {
            repr: Repr::Matrix { n, data },
            scale: 1.0,
        };
        m.check_distinct()?;
        Ok(m)
    }

    fn check_distinct(&self) -> Result<(), MetricError> {
        let n = self.len();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.raw(a, b) <= 0.0 {
                    return Err(MetricError::Coincident { a, b });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Euclidean { coords } => coords.len(),
            Repr::Matrix { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Divisor applied to raw distances; multiply a normalized length by this
    /// to recover input units.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        match &self.repr {
            Repr::Euclidean { coords } => Some(coords),
            Repr::Matrix { .. } => None,
        }
    }

    #[inline]
    fn raw(&self, a: PointId, b: PointId) -> f64 {
        match &self.repr {
            Repr::Euclidean { coords } => {
                let (x, y) = (&coords[a], &coords[b]);
                x.iter()
                    .zip(y)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt()
            }
            Repr::Matrix { n, data } => data[a * n + b],
        }
    }

    /// Distance between two points in normalized units.
    #[inline]
    pub fn dist(&self, a: PointId, b: PointId) -> f64 {
        if a == b {
            0.0
        } else {
            self.raw(a, b) / self.scale
        }
    }

    /// Smallest inter-point distance, or `None` for a singleton.
    pub fn min_distance(&self) -> Option<f64> {
        let n = self.len();
        let mut best: Option<f64> = None;
        for a in 0..n {
            for b in (a + 1)..n {
                let d = self.dist(a, b);
                if best.is_none_or(|m| d < m) {
                    best = Some(d);
                }
            }
        }
        best
    }

    /// Rescale so that the minimum inter-point distance is 1. Singletons are
    /// returned unchanged.
    pub fn normalize(&self) -> Metric {
        let mut out = self.clone();
        if let Some(min) = self.min_distance() {
            out.scale = self.scale * min;
        }
        out
    }

    /// Exact diameter by an all-pairs scan.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for a in 0..n {
            for b in (a + 1)..n {
                best = best.max(self.dist(a, b));
            }
        }
        best
    }

    /// Weight of a minimum spanning tree of the complete metric graph (dense Prim).
    pub fn mst_weight(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        best[0] = 0.0;
        let mut total = 0.0;
        for _ in 0..n {
            let mut u = usize::MAX;
            let mut bu = f64::INFINITY;
            for v in 0..n {
                if !in_tree[v] && best[v] < bu {
                    bu = best[v];
                    u = v;
                }
            }
            in_tree[u] = true;
            total += bu;
            for v in 0..n {
                if !in_tree[v] {
                    let d = self.dist(u, v);
                    if d < best[v] {
                        best[v] = d;
                    }
                }
            }
        }
        total
    }

    /// Checks the triangle inequality, exhaustively for `n <= 64` and on
    /// `10 * n` random triples otherwise. Returns the worst violating triple.
    pub fn check_triangle(&self, seed: u64) -> Result<(), TriangleViolation> {
        let n = self.len();
        let mut worst: Option<TriangleViolation> = None;
        let mut consider = |a: usize, b: usize, c: usize| {
            let lhs = self.dist(a, c);
            let rhs = self.dist(a, b) + self.dist(b, c);
            if !approx_le(lhs, rhs) {
                let excess = lhs - rhs;
                if worst.as_ref().is_none_or(|w| excess > w.excess) {
                    worst = Some(TriangleViolation { a, b, c, excess });
                }
            }
        };
        if n <= 64 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        consider(a, b, c);
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..(10 * n) {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                consider(a, b, c);
            }
        }
        match worst {
            Some(w) => Err(w),
            None => Ok(()),
        }
    }

    /// Dense matrix of normalized distances.
    pub fn to_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                out[a * n + b] = self.dist(a, b);
            }
        }
        out
    }
}

/// `d(a,c) > d(a,b) + d(b,c)` by `excess`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleViolation {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub excess: f64,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let line = line.trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_reals(lineno: usize, line: &str) -> Result<Vec<f64>, MetricError> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            tok.parse::<f64>().map_err(|e| MetricError::Parse {
                line: lineno,
                msg: format!("bad number {tok:?}: {e}"),
            })
        })
        .collect()
}

/// Parses a point file: one point per line, whitespace- or comma-separated
/// coordinates, `#` comments and blank lines ignored.
pub fn parse_points(text: &str) -> Result<Metric, MetricError> {
    let mut coords = Vec::new();
    for (lineno, line) in content_lines(text) {
        coords.push(parse_reals(lineno, line)?);
    }
    Metric::from_points(coords)
}

/// Parses a matrix file: first line `n`, then `n` rows of `n` reals.
pub fn parse_matrix(text: &str) -> Result<Metric, MetricError> {
    let mut lines = content_lines(text);
    let (lineno, first) = lines.next().ok_or(MetricError::Empty)?;
    let n: usize = first.parse().map_err(|e| MetricError::Parse {
        line: lineno,
        msg: format!("bad size {first:?}: {e}"),
    })?;
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (lineno, line) in lines {
        let row = parse_reals(lineno, line)?;
        if row.len() != n {
            return Err(MetricError::Parse {
                line: lineno,
                msg: format!("expected {n} entries, found {}", row.len()),
            });
        }
        data.extend(row);
        rows += 1;
    }
    if rows != n {
        return Err(MetricError::Parse {
            line: 0,
            msg: format!("expected {n} rows, found {rows}"),
        });
    }
    Metric::from_matrix(n, data)
}

/// Loads a metric from disk. The result is raw (not normalized).
pub fn load_points(path: &Path, mode: InputMode) -> Result<Metric, MetricError> {
    let text = fs::read_to_string(path).map_err(|source| MetricError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match mode {
        InputMode::Euclidean => parse_points(&text),
        InputMode::Matrix => parse_matrix(&text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Metric {
        Metric::from_points(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    /// Kruskal over all pairs with a tiny union-find; independent of Prim.
    fn kruskal(m: &Metric) -> f64 {
        let n = m.len();
        let mut edges: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                edges.push((m.dist(a, b), a, b));
            }
        }
        edges.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut total = 0.0;
        for (w, a, b) in edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                total += w;
            }
        }
        total
    }

    fn random_plane(n: usize, seed: u64) -> Metric {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Metric::from_points(
            (0..n)
                .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn singleton() {
        let m = parse_points("0 0\n").unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.diameter(), 0.0);
        assert_eq!(m.mst_weight(), 0.0);
        let z = m.normalize();
        assert_eq!(z.scale(), 1.0);
    }

    #[test]
    fn two_points_on_a_line() {
        let m = parse_points("0\n3\n").unwrap();
        assert_eq!(m.dist(0, 1), 3.0);
    }

    #[test]
    fn small_matrix_is_a_metric() {
        let m = parse_matrix("3\n0 1 2\n1 0 1.5\n2 1.5 0\n").unwrap();
        assert!(m.check_triangle(0).is_ok());
        assert_eq!(m.diameter(), 2.0);
    }

    #[test]
    fn asymmetric_matrix_reports_worst_pair() {
        let err = parse_matrix("3\n0 1 2\n1 0 1.5\n2.5 1.4 0\n").unwrap_err();
        match err {
            MetricError::Asymmetric { i, j, diff } => {
                assert_eq!((i, j), (0, 2));
                assert!((diff - 0.5).abs() < 1e-12);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn negative_and_nan_entries_rejected() {
        assert!(matches!(
            parse_matrix("2\n0 -1\n-1 0\n"),
            Err(MetricError::InvalidEntry { .. })
        ));
        assert!(matches!(
            parse_matrix("2\n0 NaN\nNaN 0\n"),
            Err(MetricError::InvalidEntry { .. })
        ));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_points("0 0\n1 x\n"),
            Err(MetricError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_points("0 0\n1\n"),
            Err(MetricError::DimensionMismatch { .. })
        ));
        assert!(matches!(parse_points("# nothing\n\n"), Err(MetricError::Empty)));
    }

    #[test]
    fn comments_commas_and_blank_lines() {
        let m = parse_points("# header\n0, 0\n\n3,4 # trailing\n").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.dist(0, 1), 5.0);
    }

    #[test]
    fn normalize_line() {
        let m = line(&[0.0, 2.0, 14.0, 60.0]).normalize();
        assert_eq!(m.dist(0, 1), 1.0);
        assert_eq!(m.dist(0, 2), 7.0);
        assert_eq!(m.dist(0, 3), 30.0);
        assert_eq!(m.scale(), 2.0);
    }

    #[test]
    fn normalize_is_idempotent() {
        let m = line(&[0.0, 1.0, 7.0, 30.0]);
        let z = m.normalize();
        assert_eq!(z.scale(), 1.0);
        let zz = z.normalize();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(z.dist(a, b), zz.dist(a, b));
            }
        }
    }

    #[test]
    fn normalized_random_plane_has_unit_min_distance() {
        let m = random_plane(50, 7).normalize();
        let mut min = f64::INFINITY;
        for a in 0..50 {
            for b in (a + 1)..50 {
                min = min.min(m.dist(a, b));
            }
        }
        assert!((min - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn diameter_line_and_random() {
        assert_eq!(line(&[0.0, 1.0, 7.0, 30.0]).diameter(), 30.0);
        let m = random_plane(100, 3);
        let coords = m.coords().unwrap();
        let mut best = 0.0f64;
        for a in coords {
            for b in coords {
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                best = best.max(d);
            }
        }
        assert!((m.diameter() - best).abs() < 1e-15);
    }

    #[test]
    fn mst_line_and_random() {
        assert_eq!(line(&[0.0, 1.0, 7.0, 30.0]).mst_weight(), 30.0);
        let m = random_plane(60, 11).normalize();
        let prim = m.mst_weight();
        let kr = kruskal(&m);
        assert!((prim - kr).abs() <= 1e-9 * kr);
        assert!(prim >= (m.len() - 1) as f64 - 1e-9);
    }

    #[test]
    fn matrix_and_points_agree_on_diameter() {
        let p = random_plane(30, 5);
        let mx = Metric::from_matrix(30, p.to_matrix()).unwrap();
        assert_eq!(p.diameter(), mx.diameter());
    }

    #[test]
    fn triangle_violation_detected() {
        let m = parse_matrix("3\n0 1 5\n1 0 1\n5 1 0\n").unwrap();
        let v = m.check_triangle(0).unwrap_err();
        assert!((v.excess - 3.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_points_rejected() {
        assert!(matches!(
            parse_points("1 1\n1 1\n"),
            Err(MetricError::Coincident { a: 0, b: 1 })
        ));
    }
}
