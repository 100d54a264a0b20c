//! Report schemas: run report JSON (schema 1) and the frozen sweep CSV.
//!
//! Sweep CSV columns, one row per (instance seed, ε, order seed):
//!
//! ```text
//! kind,n,instance_seed,epsilon,order_source,order_seed,edge_cost,l1,l2,linf,opt1_edge,optinf,planted_edge_cost
//! ```
//!
//! `opt1_edge` (optimal disagreeing-edge count) and `optinf` (optimal max
//! per-vertex disagreements) are filled only when n ≤ 12; the planted
//! reference column only when the instance carries a ground truth. Empty
//! cells mean "not applicable". Rows are emitted in deterministic
//! (instance seed, ε, order seed) loop order regardless of worker count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cost::CostReport;
use crate::engine::Clustering;
use crate::graph::VertexId;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub epsilon: String,
    pub seed: u64,
    pub order_source: String,
    pub centers_order: Vec<VertexId>,
    pub clusters: Vec<Vec<VertexId>>,
    pub phase: BTreeMap<VertexId, String>,
    pub cost: CostReport,
}

impl RunReport {
    pub fn new(
        clustering: &Clustering,
        cost: CostReport,
        epsilon: String,
        seed: u64,
        order_source: String,
    ) -> Self {
        RunReport {
            schema: 1,
            epsilon,
            seed,
            order_source,
            centers_order: clustering.centers_order.clone(),
            clusters: clustering.clusters.clone(),
            phase: clustering
                .phase_map()
                .into_iter()
                .map(|(v, tag)| (v, tag.to_string()))
                .collect(),
            cost,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

pub const SWEEP_HEADER: &str = "kind,n,instance_seed,epsilon,order_source,order_seed,edge_cost,l1,l2,linf,opt1_edge,optinf,planted_edge_cost";

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub kind: String,
    pub n: u32,
    pub instance_seed: u64,
    pub epsilon: String,
    pub order_source: String,
    pub order_seed: u64,
    pub edge_cost: u64,
    pub l1: u64,
    pub l2: f64,
    pub linf: u32,
    pub opt1_edge: Option<u64>,
    pub optinf: Option<u32>,
    pub planted_edge_cost: Option<u64>,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.kind,
            self.n,
            self.instance_seed,
            self.epsilon,
            self.order_source,
            self.order_seed,
            self.edge_cost,
            self.l1,
            self.l2,
            self.linf,
            opt(&self.opt1_edge.map(|v| v.to_string())),
            opt(&self.optinf.map(|v| v.to_string())),
            opt(&self.planted_edge_cost.map(|v| v.to_string())),
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_row_formats_empty_cells() {
        let row = SweepRow {
            kind: "planted".into(),
            n: 10,
            instance_seed: 1,
            epsilon: "1/2".into(),
            order_source: "random".into(),
            order_seed: 3,
            edge_cost: 4,
            l1: 8,
            l2: 3.5,
            linf: 2,
            opt1_edge: None,
            optinf: Some(1),
            planted_edge_cost: None,
        };
        assert_eq!(row.to_csv(), "planted,10,1,1/2,random,3,4,8,3.5,2,,1,");
        let csv = sweep_csv(&[row]);
        assert!(csv.starts_with(SWEEP_HEADER));
        assert_eq!(csv.lines().count(), 2);
    }
}
