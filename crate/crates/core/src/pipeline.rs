//! End-to-end construction: net-tree, surrogate sets, spanner, shortcuts.

use std::str::FromStr;

use thiserror::Error;

use crate::construct::{
    assemble_spanner, compute_sets, default_gamma, AssembleError, AssembleMode, ConstructError, Params,
    ReservePolicy, SurrogateTable,
};
use crate::metric::Metric;
use crate::net_tree::{NetTree, NetTreeError};
use crate::shortcuts::{add_shortcuts, prune_tree, shortcut_pairs, PrunedTree};
use crate::spanner::FtSpanner;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    CliqueOnly,
    Matching,
    /// Matchings plus shortcuts over light subtrees.
    Full,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clique-only" => Ok(Mode::CliqueOnly),
            "matching" => Ok(Mode::Matching),
            "full" => Ok(Mode::Full),
            _ => Err(format!("unknown mode {s:?} (expected clique-only, matching or full)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuildConfig {
    pub eps: f64,
    pub k: usize,
    pub gamma: Option<f64>,
    pub mode: Mode,
    /// Replaces the realized `xi` in the degree threshold.
    pub xi: Option<usize>,
    pub reserve: ReservePolicy,
}

impl BuildConfig {
    pub fn new(eps: f64, k: usize) -> Self {
        BuildConfig {
            eps,
            k,
            gamma: None,
            mode: Mode::Full,
            xi: None,
            reserve: ReservePolicy::Truncated,
        }
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn xi(mut self, xi: usize) -> Self {
        self.xi = Some(xi);
        self
    }

    pub fn reserve(mut self, policy: ReservePolicy) -> Self {
        self.reserve = policy;
        self
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    NetTree(#[from] NetTreeError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Assemble(#[from] AssembleError),
    #[error("point {point} has degree {degree} above 2D = {limit}")]
    DegreeThreshold { point: usize, degree: u64, limit: u64 },
}

#[derive(Clone, Debug)]
pub struct BuildOutput {
    pub tree: NetTree,
    pub params: Params,
    pub table: SurrogateTable,
    pub spanner: FtSpanner,
    pub pruned: Option<PrunedTree>,
    pub shortcut_pairs: usize,
}

/// Checks `k <= n - 2` and `eps > 0`.
pub fn validate(n: usize, cfg: &BuildConfig) -> Result<(), BuildError> {
    if !(cfg.eps > 0.0) {
        return Err(BuildError::Config(format!("eps must be positive, got {}", cfg.eps)));
    }
    if n >= 2 && cfg.k > n - 2 || n < 2 && cfg.k > 0 {
        return Err(BuildError::Config(format!(
            "k must be ≤ n−2 (k = {}, n = {n})",
            cfg.k
        )));
    }
    if let Some(g) = cfg.gamma {
        if !(g > 0.0) {
            return Err(BuildError::Config(format!("gamma must be positive, got {g}")));
        }
    }
    Ok(())
}

/// Builds the spanner for a normalized metric.
pub fn build(m: &Metric, cfg: &BuildConfig) -> Result<BuildOutput, BuildError> {
    validate(m.len(), cfg)?;
    if let Some(d) = m.min_distance() {
        if (d - 1.0).abs() > 1e-9 {
            return Err(BuildError::Config(format!(
                "metric is not normalized (minimum distance {d})"
            )));
        }
    }
    let gamma = cfg.gamma.unwrap_or_else(|| default_gamma(cfg.eps));
    let mut tree = NetTree::build(m)?;
    tree.add_cross_edges(m, gamma);
    let params = Params::new(cfg.k, cfg.eps, gamma, cfg.xi.unwrap_or(tree.xi())).with_reserve(cfg.reserve);
    let table = compute_sets(&tree, m, &params)?;
    let limit = 2 * params.degree_threshold;
    for p in 0..m.len() {
        let degree = u64::from(table.final_degree(p));
        if degree > limit {
            return Err(BuildError::DegreeThreshold { point: p, degree, limit });
        }
    }
    let assemble_mode = match cfg.mode {
        Mode::CliqueOnly => AssembleMode::CliqueOnly,
        Mode::Matching | Mode::Full => AssembleMode::Matching,
    };
    let mut spanner = assemble_spanner(&tree, m, &table, assemble_mode)?;
    let mut pruned = None;
    let mut pairs = 0;
    if cfg.mode == Mode::Full {
        let pt = prune_tree(&tree, &table);
        let sc = shortcut_pairs(&tree, &pt, m.diameter(), m.len());
        pairs = sc.len();
        add_shortcuts(&mut spanner, &tree, m, &table, &sc);
        pruned = Some(pt);
    }
    Ok(BuildOutput {
        tree,
        params,
        table,
        spanner,
        pruned,
        shortcut_pairs: pairs,
    })
}

impl BuildOutput {
    /// How many nodes use each point as a surrogate.
    pub fn surrogate_use(&self) -> Vec<usize> {
        let mut count = vec![0; self.spanner.n()];
        for x in 0..self.tree.len() {
            for &p in self.table.surrogates(x) {
                count[p] += 1;
            }
        }
        count
    }
}
