use std::collections::BTreeMap;

use serde::Serialize;

use super::audit::Finding;
use super::hops::HopReport;
use super::stretch::SuiteResult;
use crate::metric::Metric;
use crate::spanner::FtSpanner;

/// Measured quality of a spanner, serialized as the stats document.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub max_degree: usize,
    pub edge_count: usize,
    /// Total weight in input units.
    pub weight: f64,
    pub mst_weight: f64,
    pub lightness: f64,
    pub edges_by_kind: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hops: Option<HopReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub faults: Option<SuiteResult>,
    pub audit_findings: Vec<Finding>,
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn measure(sp: &FtSpanner, m: &Metric, k: usize, eps: f64) -> Report {
        let mst = m.mst_weight();
        let weight = sp.weight();
        Report {
            n: m.len(),
            k,
            eps,
            max_degree: sp.max_degree(),
            edge_count: sp.len(),
            weight: weight * m.scale(),
            mst_weight: mst * m.scale(),
            lightness: if mst > 0.0 { weight / mst } else { 0.0 },
            edges_by_kind: sp
                .count_by_kind()
                .into_iter()
                .filter(|&(_, c)| c > 0)
                .map(|(kind, c)| (kind.to_string(), c))
                .collect(),
            hops: None,
            faults: None,
            audit_findings: Vec::new(),
            timings: BTreeMap::new(),
        }
    }
}
