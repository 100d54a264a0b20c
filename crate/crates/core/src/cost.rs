//! Cost evaluation and exact reference oracles.
//!
//! Disagreements are counted per vertex: a positive edge cut by the
//! partition, or a negative edge kept inside a cluster, charges both
//! endpoints. ℓp objectives aggregate that vector, so ‖y‖₁ double-counts
//! disagreeing edges; reports carry both the edge count and ‖y‖₁.
//!
//! The brute-force oracle enumerates set partitions as restricted-growth
//! strings with incremental cost updates and exact integer comparisons.
//! It refuses n > 12 (4,213,597 partitions at n = 12).

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{BigRational, One, Zero};
use thiserror::Error;

use crate::engine::{modified_pivot_batch, Clustering, Phase};
use crate::graph::{EdgeOracle, SignedGraph, VertexId};
use crate::metrics::MetricContext;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("clustering labels {0} vertices but the graph has {1}")]
    NotAPartition(usize, u32),
    #[error("p-norm requires p ≥ 1, got {0}")]
    BadNorm(String),
    #[error("brute force refuses n = {0} > {1}")]
    TooLarge(u32, u32),
    #[error("order must be a permutation of V: {0}")]
    BadOrder(String),
}

/// Per-vertex disagreement counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisagreementVector(pub Vec<u32>);

impl DisagreementVector {
    pub fn l1(&self) -> u64 {
        self.0.iter().map(|&y| u64::from(y)).sum()
    }

    pub fn linf(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Number of disagreeing edges (each contributes 2 to ‖y‖₁).
    pub fn edge_cost(&self) -> u64 {
        debug_assert!(self.l1().is_multiple_of(2));
        self.l1() / 2
    }
}

/// Count disagreements of a partition given as a dense label vector.
/// Self-loops are never edges and never counted.
pub fn disagreements(
    g: &SignedGraph,
    cluster_of: &[usize],
) -> Result<DisagreementVector, CostError> {
    if cluster_of.len() != g.n() as usize {
        return Err(CostError::NotAPartition(cluster_of.len(), g.n()));
    }
    let n = g.n();
    let mut y = vec![0u32; n as usize];
    for u in 0..n {
        for v in (u + 1)..n {
            let same = cluster_of[u as usize] == cluster_of[v as usize];
            let positive = g.is_positive(u, v);
            if positive != same {
                y[u as usize] += 1;
                y[v as usize] += 1;
            }
        }
    }
    Ok(DisagreementVector(y))
}

/// The ℓp objective selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PNorm {
    Finite(u32),
    Inf,
}

impl PNorm {
    pub fn parse(s: &str) -> Result<Self, CostError> {
        match s.trim() {
            "inf" | "Inf" | "INF" | "infinity" => Ok(PNorm::Inf),
            other => {
                let p: u32 = other
                    .parse()
                    .map_err(|_| CostError::BadNorm(other.to_string()))?;
                if p == 0 {
                    return Err(CostError::BadNorm(other.to_string()));
                }
                Ok(PNorm::Finite(p))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            PNorm::Finite(p) => p.to_string(),
            PNorm::Inf => "inf".to_string(),
        }
    }
}

/// ‖y‖_p as a float; max for p = ∞.
pub fn lp_cost(y: &DisagreementVector, p: PNorm) -> f64 {
    match p {
        PNorm::Inf => f64::from(y.linf()),
        PNorm::Finite(1) => y.l1() as f64,
        PNorm::Finite(p) => {
            let sum: f64 = y.0.iter().map(|&v| f64::from(v).powi(p as i32)).sum();
            sum.powf(1.0 / f64::from(p))
        }
    }
}

/// Σ y(u)^p exactly, for integer p.
pub fn lp_sum_exact(y: &DisagreementVector, p: u32) -> u128 {
    y.0.iter().map(|&v| u128::from(v).pow(p)).sum()
}

/// Cost summary in the frozen report schema.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CostReport {
    pub edge_cost: u64,
    pub y: Vec<u32>,
    pub norms: BTreeMap<String, f64>,
}

impl CostReport {
    pub fn compute(
        g: &SignedGraph,
        cluster_of: &[usize],
        ps: &[PNorm],
    ) -> Result<Self, CostError> {
        let y = disagreements(g, cluster_of)?;
        let mut norms = BTreeMap::new();
        for &p in ps {
            norms.insert(p.label(), lp_cost(&y, p));
        }
        Ok(CostReport {
            edge_cost: y.edge_cost(),
            y: y.0,
            norms,
        })
    }
}

pub const BRUTE_FORCE_MAX_N: u32 = 12;

#[derive(Debug, Clone)]
pub struct OptResult {
    pub p: PNorm,
    /// ‖y‖_p of the optimum (float view of `exact`).
    pub norm: f64,
    /// Exact objective: Σ y^p for finite p, max y for ∞.
    pub exact: u128,
    pub edge_cost: u64,
    pub y: Vec<u32>,
    pub cluster_of: Vec<usize>,
    pub clusters: Vec<Vec<VertexId>>,
}

/// Exact minimizer of the ℓp objective over every set partition.
pub fn brute_force_opt(g: &SignedGraph, p: PNorm) -> Result<OptResult, CostError> {
    brute_force_opt_linked(g, p, &[])
}

/// Same, restricted to partitions placing each linked pair in one cluster.
pub fn brute_force_opt_linked(
    g: &SignedGraph,
    p: PNorm,
    must_link: &[(VertexId, VertexId)],
) -> Result<OptResult, CostError> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(CostError::TooLarge(n, BRUTE_FORCE_MAX_N));
    }
    // forced[i] = Some(j) with j < i requires label[i] == label[j].
    let mut forced: Vec<Option<usize>> = vec![None; n as usize];
    for &(a, b) in must_link {
        let (lo, hi) = (a.min(b) as usize, a.max(b) as usize);
        forced[hi] = Some(lo);
    }

    let mut search = Search {
        g,
        p,
        labels: vec![0usize; n as usize],
        y: vec![0u32; n as usize],
        powtab: match p {
            PNorm::Finite(q) => (0..=n as u128).map(|v| v.pow(q)).collect(),
            PNorm::Inf => Vec::new(),
        },
        partial: Partial {
            edge_cost: 0,
            sum_pow: 0,
            max_y: 0,
        },
        forced,
        best: None,
    };
    if n == 0 {
        return Ok(OptResult {
            p,
            norm: 0.0,
            exact: 0,
            edge_cost: 0,
            y: vec![],
            cluster_of: vec![],
            clusters: vec![],
        });
    }
    search.descend(0, 0);
    let best = search.best.expect("at least one partition exists");
    let y = DisagreementVector(best.y.clone());
    let norm = lp_cost(&y, p);
    let clusters = labels_to_clusters(&best.labels);
    Ok(OptResult {
        p,
        norm,
        exact: best.exact,
        edge_cost: best.edge_cost,
        y: best.y,
        cluster_of: best.labels,
        clusters,
    })
}

pub fn labels_to_clusters(labels: &[usize]) -> Vec<Vec<VertexId>> {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut clusters = vec![Vec::new(); k];
    for (v, &c) in labels.iter().enumerate() {
        clusters[c].push(v as VertexId);
    }
    clusters
}

struct Partial {
    edge_cost: u64,
    sum_pow: u128,
    max_y: u32,
}

struct Best {
    exact: u128,
    edge_cost: u64,
    y: Vec<u32>,
    labels: Vec<usize>,
}

struct Search<'a> {
    g: &'a SignedGraph,
    p: PNorm,
    labels: Vec<usize>,
    y: Vec<u32>,
    powtab: Vec<u128>,
    partial: Partial,
    forced: Vec<Option<usize>>,
    best: Option<Best>,
}

impl Search<'_> {
    fn objective(&self) -> u128 {
        match self.p {
            PNorm::Finite(_) => self.partial.sum_pow,
            PNorm::Inf => u128::from(self.partial.max_y),
        }
    }

    fn prunable(&self) -> bool {
        // y never decreases as more vertices are placed, so the partial
        // objective is a lower bound on every completion.
        self.best
            .as_ref()
            .is_some_and(|b| self.objective() >= b.exact)
    }

    fn descend(&mut self, i: usize, max_used: usize) {
        let n = self.labels.len();
        if i == n {
            let exact = self.objective();
            let better = self.best.as_ref().is_none_or(|b| exact < b.exact);
            if better {
                self.best = Some(Best {
                    exact,
                    edge_cost: self.partial.edge_cost,
                    y: self.y.clone(),
                    labels: self.labels.clone(),
                });
            }
            return;
        }
        let candidates: Vec<usize> = match self.forced[i] {
            Some(j) => vec![self.labels[j]],
            None => (0..=max_used.min(i)).collect(),
        };
        for c in candidates {
            self.labels[i] = c;
            let touched = self.place(i, c);
            if !self.prunable() {
                self.descend(i + 1, max_used.max(c + 1));
            }
            self.unplace(i, touched);
        }
    }

    /// Apply disagreements of vertex i against already-placed vertices;
    /// returns the neighbors charged so the move can be undone.
    fn place(&mut self, i: usize, c: usize) -> Vec<usize> {
        let mut touched = Vec::new();
        for j in 0..i {
            let same = self.labels[j] == c;
            let positive = self.g.is_positive(j as VertexId, i as VertexId);
            if positive != same {
                self.bump(j, 1);
                self.bump(i, 1);
                self.partial.edge_cost += 1;
                touched.push(j);
            }
        }
        touched
    }

    fn unplace(&mut self, i: usize, touched: Vec<usize>) {
        for j in touched {
            self.bump(j, -1);
            self.bump(i, -1);
            self.partial.edge_cost -= 1;
        }
        // max_y can only be recomputed after decrements.
        if matches!(self.p, PNorm::Inf) {
            self.partial.max_y = self.y.iter().copied().max().unwrap_or(0);
        }
    }

    fn bump(&mut self, v: usize, delta: i32) {
        let old = self.y[v];
        let new = old.wrapping_add_signed(delta);
        self.y[v] = new;
        match self.p {
            PNorm::Finite(_) => {
                self.partial.sum_pow -= self.powtab[old as usize];
                self.partial.sum_pow += self.powtab[new as usize];
            }
            PNorm::Inf => {
                if new > self.partial.max_y {
                    self.partial.max_y = new;
                }
            }
        }
    }
}

/// The baseline pivot: batch pool semantics with every positive edge
/// clusterable, over a full arrival order of V.
pub fn classic_pivot(g: &SignedGraph, order: &[VertexId]) -> Result<Clustering, CostError> {
    let n = g.n();
    let mut seen = vec![false; n as usize];
    for &v in order {
        if v >= n || seen[v as usize] {
            return Err(CostError::BadOrder(format!("bad or repeated vertex {v}")));
        }
        seen[v as usize] = true;
    }
    if order.len() != n as usize {
        return Err(CostError::BadOrder(format!(
            "expected {n} vertices, got {}",
            order.len()
        )));
    }
    let pool_labels = modified_pivot_batch(order, |a, b| g.is_positive(a, b));
    let mut cluster_of = vec![0usize; n as usize];
    let k = pool_labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut clusters = vec![Vec::new(); k];
    for (pos, &v) in order.iter().enumerate() {
        cluster_of[v as usize] = pool_labels[pos];
        clusters[pool_labels[pos]].push(v);
    }
    Ok(Clustering {
        n,
        cluster_of,
        clusters,
        phase: vec![Phase::PivotIneligible; n as usize],
        center: vec![None; n as usize],
        centers_order: vec![],
    })
}

/// Which metric a fractional cost is taken over, on a given context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracMetric {
    /// The (estimated) correlation metric d^U.
    Corr,
    /// The (estimated) adjusted correlation metric d^{U,W}.
    Adj,
}

/// Fractional cost of a vertex:
/// D(u) = Σ_{v ∈ N_u⁺} d(u,v) + Σ_{v ∈ N_u⁻} (1 − d(u,v)),
/// optionally restricting v to a vertex set (membership slice of size n).
/// The self-loop contributes d(u,u) = 0.
pub fn fractional_cost<G: EdgeOracle>(
    ctx: &MetricContext<'_, G>,
    metric: FracMetric,
    restrict: Option<&[bool]>,
    u: VertexId,
) -> BigRational {
    let n = ctx.graph().vertex_count();
    let mut total = BigRational::zero();
    for v in 0..n {
        if v == u {
            continue;
        }
        if let Some(inside) = restrict {
            if !inside[v as usize] {
                continue;
            }
        }
        let d = match metric {
            FracMetric::Corr => ctx.corr_dist(u, v),
            FracMetric::Adj => ctx.adj_dist(u, v),
        };
        let d = BigRational::new(BigInt::from(d.numer()), BigInt::from(d.denom()));
        if ctx.graph().positive(u, v) {
            total += d;
        } else {
            total += BigRational::one() - d;
        }
    }
    total
}

pub fn fractional_cost_vector<G: EdgeOracle>(
    ctx: &MetricContext<'_, G>,
    metric: FracMetric,
    restrict: Option<&[bool]>,
) -> Vec<BigRational> {
    (0..ctx.graph().vertex_count())
        .map(|u| fractional_cost(ctx, metric, restrict, u))
        .collect()
}

/// Σ_u Σ_{v ∈ N_u⁺} d(u,v): the positive part of the fractional cost over
/// ordered pairs (each positive edge contributes its distance twice).
pub fn positive_fractional_total<G: EdgeOracle>(
    ctx: &MetricContext<'_, G>,
    metric: FracMetric,
) -> BigRational {
    let n = ctx.graph().vertex_count();
    let mut total = BigRational::zero();
    for u in 0..n {
        for v in 0..n {
            if v == u || !ctx.graph().positive(u, v) {
                continue;
            }
            let d = match metric {
                FracMetric::Corr => ctx.corr_dist(u, v),
                FracMetric::Adj => ctx.adj_dist(u, v),
            };
            total += BigRational::new(BigInt::from(d.numer()), BigInt::from(d.denom()));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{Epsilon, SubsampleBundle};

    fn bad_triangle() -> SignedGraph {
        SignedGraph::from_edges(3, &[(0, 1), (0, 2)]).unwrap()
    }

    fn g1_n6() -> SignedGraph {
        // Two positive triangles {0,1,2}, {3,4,5} plus the cross edge (0,3).
        SignedGraph::from_edges(
            6,
            &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (0, 3)],
        )
        .unwrap()
    }

    #[test]
    fn disagreement_examples() {
        // Perfect partition: all-zero vector.
        let g = SignedGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let y = disagreements(&g, &[0, 0, 1, 1]).unwrap();
        assert_eq!(y.0, vec![0; 4]);

        // G₁ (n = 6) in one cluster: the bridge endpoints carry 2, the rest 3.
        let y = disagreements(&g1_n6(), &[0; 6]).unwrap();
        assert_eq!(y.0, vec![2, 3, 3, 2, 3, 3]);
        assert_eq!(y.linf(), 3);
        assert_eq!(y.l1(), 16);
        assert_eq!(y.edge_cost(), 8);

        // Singletons on a positive 4-clique cut every edge.
        let mut edges = Vec::new();
        for u in 0..4u32 {
            for v in (u + 1)..4 {
                edges.push((u, v));
            }
        }
        let clique = SignedGraph::from_edges(4, &edges).unwrap();
        let y = disagreements(&clique, &[0, 1, 2, 3]).unwrap();
        assert_eq!(y.0, vec![3; 4]);
        assert_eq!(y.edge_cost(), 6);
    }

    #[test]
    fn lp_cost_arithmetic() {
        let y = DisagreementVector(vec![2, 1, 1]);
        assert_eq!(lp_cost(&y, PNorm::Finite(1)), 4.0);
        assert_eq!(lp_cost(&y, PNorm::Inf), 2.0);
        assert!((lp_cost(&y, PNorm::Finite(2)) - 6f64.sqrt()).abs() < 1e-12);
        assert_eq!(lp_sum_exact(&y, 2), 6);
        let zero = DisagreementVector(vec![0; 5]);
        for p in [PNorm::Finite(1), PNorm::Finite(3), PNorm::Inf] {
            assert_eq!(lp_cost(&zero, p), 0.0);
        }
        assert!(PNorm::parse("0").is_err());
        assert_eq!(PNorm::parse("inf").unwrap(), PNorm::Inf);
    }

    #[test]
    fn lp_monotone_in_p() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        for _ in 0..50 {
            let y = DisagreementVector((0..10).map(|_| rng.gen_range(0..8u32)).collect());
            let mut prev = lp_cost(&y, PNorm::Finite(1));
            for p in 2..=6 {
                let cur = lp_cost(&y, PNorm::Finite(p));
                assert!(cur <= prev + 1e-9, "p={p}: {cur} > {prev}");
                prev = cur;
            }
            assert!(lp_cost(&y, PNorm::Inf) <= prev + 1e-9);
        }
    }

    #[test]
    fn brute_force_examples() {
        // Positive clique: cost 0 in a single cluster.
        let mut edges = Vec::new();
        for u in 0..5u32 {
            for v in (u + 1)..5 {
                edges.push((u, v));
            }
        }
        let clique = SignedGraph::from_edges(5, &edges).unwrap();
        let opt = brute_force_opt(&clique, PNorm::Inf).unwrap();
        assert_eq!(opt.exact, 0);
        assert_eq!(opt.clusters.len(), 1);

        // G₁ (n = 6): ℓ∞ optimum is 1 (cut the cross edge).
        let opt = brute_force_opt(&g1_n6(), PNorm::Inf).unwrap();
        assert_eq!(opt.exact, 1);

        // Bad triangle: one disagreeing edge is unavoidable.
        let opt = brute_force_opt(&bad_triangle(), PNorm::Finite(1)).unwrap();
        assert_eq!(opt.edge_cost, 1);

        // Size limit.
        assert!(matches!(
            brute_force_opt(&SignedGraph::empty(13), PNorm::Inf),
            Err(CostError::TooLarge(13, _))
        ));
    }

    #[test]
    fn brute_force_respects_links() {
        // Forcing the G₁ bridge endpoints together costs exactly n/2 − 1 = 2:
        // the pair {0,3} cut from both cliques leaves y(0) = y(3) = 2, and
        // y(0) + y(3) ≥ n − 2 for any partition keeping them together.
        let opt = brute_force_opt_linked(&g1_n6(), PNorm::Inf, &[(0, 3)]).unwrap();
        assert_eq!(opt.cluster_of[0], opt.cluster_of[3]);
        assert_eq!(opt.exact, 2);
        let certificate = disagreements(&g1_n6(), &[0, 1, 1, 0, 2, 2]).unwrap();
        assert_eq!(certificate.linf(), 2);
    }

    #[test]
    fn brute_force_lower_bounds_random_clusterings() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(21);
        let g = SignedGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (4, 5), (0, 5)]).unwrap();
        for p in [PNorm::Finite(1), PNorm::Finite(2), PNorm::Inf] {
            let opt = brute_force_opt(&g, p).unwrap();
            for _ in 0..1000 {
                let labels: Vec<usize> = (0..6).map(|_| rng.gen_range(0..6)).collect();
                let y = disagreements(&g, &labels).unwrap();
                let exact = match p {
                    PNorm::Finite(q) => lp_sum_exact(&y, q),
                    PNorm::Inf => u128::from(y.linf()),
                };
                assert!(opt.exact <= exact);
            }
        }
    }

    #[test]
    fn classic_pivot_merges_g1_from_bridge() {
        let g = g1_n6();
        let c = classic_pivot(&g, &[0, 3, 1, 2, 4, 5]).unwrap();
        assert_eq!(c.cluster_count_nonempty(), 1);
        let y = disagreements(&g, &c.cluster_of).unwrap();
        assert_eq!(y.linf(), 3);
    }

    #[test]
    fn classic_pivot_equals_engine_on_empty_sample() {
        use crate::engine::{canonical_labels, run, ArrivalOrder};
        let g = g1_n6();
        let bundle = SubsampleBundle::from_parts(
            Epsilon::new(1, 2).unwrap(),
            0,
            vec![],
            vec![],
            vec![],
            vec![],
            vec![],
        )
        .unwrap();
        for seed in 0..10 {
            let order = ArrivalOrder::shuffled(6, &bundle.s, seed);
            let engine = run(&g, &bundle, &order).unwrap();
            let pivot = classic_pivot(&g, order.as_slice()).unwrap();
            assert_eq!(
                canonical_labels(&engine.cluster_of),
                canonical_labels(&pivot.cluster_of)
            );
            assert_eq!(engine.phase, pivot.phase);
        }
    }

    #[test]
    fn fractional_cost_examples() {
        // Perfect planted instance: D(u) = 0 under the true metric.
        let g = SignedGraph::from_edges(5, &[(0, 1), (2, 3), (2, 4), (3, 4)]).unwrap();
        let ctx = MetricContext::full(&g);
        for u in 0..5 {
            assert!(fractional_cost(&ctx, FracMetric::Corr, None, u).is_zero());
        }

        // E⁺ = {01, 02}: D(0) = 2/3, D(1) = 1/3 + 1/3 = 2/3.
        let g = bad_triangle();
        let ctx = MetricContext::full(&g);
        let frac = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(fractional_cost(&ctx, FracMetric::Corr, None, 0), frac(2, 3));
        assert_eq!(fractional_cost(&ctx, FracMetric::Corr, None, 1), frac(2, 3));

        // Empty distance sample: every d̃ is 1, so the positive sum collects
        // deg⁺(u) ones and the negative sum vanishes.
        let bundle = SubsampleBundle::from_parts(
            Epsilon::new(1, 2).unwrap(),
            0,
            vec![],
            vec![],
            vec![],
            vec![],
            vec![],
        )
        .unwrap();
        let est = MetricContext::estimated(&g, &bundle);
        for u in 0..3u32 {
            let deg = g.pos_degree(u) as i64;
            assert_eq!(
                fractional_cost(&est, FracMetric::Adj, None, u),
                BigRational::from_integer(deg.into())
            );
        }
    }
}
