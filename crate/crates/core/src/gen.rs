//! Seeded instance generators used by tests, the benchmark, and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metric::Metric;

/// `n` points drawn uniformly from a `1000 x 1000` square.
pub fn uniform_plane(n: usize, seed: u64) -> Metric {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n)
        .map(|_| vec![rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0)])
        .collect();
    Metric::from_points(coords).expect("distinct random points")
}

/// `n` equally spaced points on a line.
pub fn line(n: usize) -> Metric {
    Metric::from_points((0..n).map(|i| vec![i as f64]).collect()).expect("distinct points")
}

/// Shape of a hierarchically clustered plane instance.
#[derive(Clone, Copy, Debug)]
pub struct Clustered {
    pub leaf_size: usize,
    pub fanout: usize,
    /// Ratio between the radii of consecutive cluster levels.
    pub gap: f64,
}

impl Default for Clustered {
    fn default() -> Self {
        Clustered {
            leaf_size: 2,
            fanout: 2,
            gap: 1e4,
        }
    }
}

const LEAF_RADIUS: f64 = 64.0;
const LEAF_SEPARATION: f64 = 16.0;
const COORD_LIMIT: f64 = (1u64 << 50) as f64;

impl Clustered {
    /// Points split as evenly as possible among `fanout` child clusters,
    /// recursively, until a cluster holds at most `leaf_size` points. Child
    /// clusters sit inside a disk `gap` times larger than their own.
    ///
    /// Coordinates are integers so that differences of nearby points are exact
    /// even when the instance spans many orders of magnitude.
    pub fn generate(&self, n: usize, seed: u64) -> Metric {
        assert!(self.leaf_size >= 1 && self.fanout >= 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut depth = 0;
        while self.leaf_size * self.fanout.pow(depth as u32) < n {
            depth += 1;
        }
        let gap = if depth == 0 {
            self.gap
        } else {
            self.gap.min((COORD_LIMIT / LEAF_RADIUS).powf(1.0 / depth as f64))
        };

        // (center, point count) per cluster, top down.
        let mut clusters = vec![([0.0f64, 0.0], n)];
        for d in (0..depth).rev() {
            let radius = LEAF_RADIUS * gap.powi(d + 1);
            let mut next = Vec::with_capacity(clusters.len() * self.fanout);
            for &(c, count) in &clusters {
                let parts = self.fanout.min(count);
                for (j, off) in scatter(&mut rng, parts, radius, radius / 4.0).into_iter().enumerate() {
                    let share = count / parts + usize::from(j < count % parts);
                    next.push(([c[0] + off[0], c[1] + off[1]], share));
                }
            }
            clusters = next;
        }

        let mut coords = Vec::with_capacity(n);
        for (c, count) in clusters {
            for off in scatter(&mut rng, count, LEAF_RADIUS, LEAF_SEPARATION) {
                coords.push(vec![(c[0] + off[0]).round(), (c[1] + off[1]).round()]);
            }
        }
        Metric::from_points(coords).expect("separated cluster points are distinct")
    }
}

/// Up to `m` offsets inside a disk of `radius`, pairwise at least `sep` apart.
fn scatter(rng: &mut ChaCha8Rng, m: usize, radius: f64, sep: f64) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(m);
    let mut attempts = 0usize;
    while out.len() < m {
        attempts += 1;
        assert!(attempts < 1_000_000, "cannot place {m} points with separation {sep}");
        let x = rng.gen_range(-radius..radius);
        let y = rng.gen_range(-radius..radius);
        if x * x + y * y > radius * radius {
            continue;
        }
        if out
            .iter()
            .all(|o| (o[0] - x).hypot(o[1] - y) >= sep)
        {
            out.push([x, y]);
        }
    }
    out
}

/// A random metric given only by its distance matrix: noisy Euclidean
/// distances between random plane points, closed under shortest paths so
/// the triangle inequality holds exactly.
pub fn noisy_matrix(n: usize, seed: u64) -> Metric {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0)])
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let base = (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]);
            let w = base * (1.0 + rng.gen_range(0.0..0.3));
            d[i * n + j] = w;
            d[j * n + i] = w;
        }
    }
    for via in 0..n {
        for i in 0..n {
            let a = d[i * n + via];
            for j in 0..n {
                let c = a + d[via * n + j];
                if c < d[i * n + j] {
                    d[i * n + j] = c;
                }
            }
        }
    }
    Metric::from_matrix(n, d).expect("closure of a symmetric matrix is a metric")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_seeded() {
        let a = uniform_plane(20, 7);
        let b = uniform_plane(20, 7);
        let c = uniform_plane(20, 8);
        assert_eq!(a.dist(3, 11), b.dist(3, 11));
        assert_ne!(a.dist(3, 11), c.dist(3, 11));
    }

    #[test]
    fn clustered_has_requested_size_and_separation() {
        for n in [1, 7, 64, 300] {
            let m = Clustered::default().generate(n, 3);
            assert_eq!(m.len(), n);
            if n > 1 {
                assert!(m.min_distance().unwrap() >= LEAF_SEPARATION - 2.0);
            }
        }
    }

    #[test]
    fn clustered_triangle_holds() {
        let m = Clustered::default().generate(200, 5);
        m.check_triangle(1).unwrap();
    }

    #[test]
    fn noisy_matrix_is_metric() {
        let m = noisy_matrix(40, 2);
        m.check_triangle(0).unwrap();
        assert_eq!(m.len(), 40);
    }

    #[test]
    fn line_spacing() {
        let m = line(5);
        assert_eq!(m.dist(0, 4), 4.0);
        assert_eq!(m.min_distance(), Some(1.0));
    }
}
