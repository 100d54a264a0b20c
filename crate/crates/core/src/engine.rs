//! The online clustering engine: pre-clustering against the ordered centers
//! plus the two ModifiedPivot pools.
//!
//! Vertices of the sample S are processed first (ascending id), then the
//! online part arrives in the given order. Each arrival is assigned
//! irrevocably to exactly one of three fates:
//!
//! * eligible and within c·r of some center → joins the pre-cluster of the
//!   earliest such center in the ordering;
//! * ineligible (no positive neighbor in S_d) → enters the ineligible pool,
//!   pivoted with clusterable edges E_c = all positive pool edges;
//! * eligible but far from every center → enters the eligible pool, pivoted
//!   with E_c = positive pool edges of estimated distance strictly below c·r.
//!
//! Pool pivoting is incremental: an arrival attaches to the cluster of the
//! earliest pool member joined to it by a clusterable edge, else opens a new
//! cluster. Because assignments are write-once this matches re-running the
//! batch pivot on the pool after every prefix, which `modified_pivot_batch`
//! exists to certify.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::centers::{order_centers, OrderedCenters};
use crate::graph::{EdgeOracle, VertexId};
use crate::metrics::MetricContext;
use crate::sampling::SubsampleBundle;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("vertex {0} arrived twice")]
    DoubleArrival(VertexId),
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(VertexId, u32),
    #[error("arrival order must be a permutation of V ∖ S: {0}")]
    BadOrder(String),
    #[error("run ended with {0} vertices never arriving")]
    Incomplete(usize),
}

/// Which path assigned a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Preclustered,
    PivotIneligible,
    PivotEligible,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Preclustered => "preclustered",
            Phase::PivotIneligible => "pivot_ineligible",
            Phase::PivotEligible => "pivot_eligible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub cluster: usize,
    pub phase: Phase,
    /// The claiming center s*(v), set only for pre-clustered vertices.
    pub center: Option<VertexId>,
}

/// Final (or partial) clustering with provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    pub n: u32,
    /// Cluster id per vertex; clusters[id] lists members in arrival order.
    pub cluster_of: Vec<usize>,
    /// Includes the |S_p| pre-clusters (possibly empty) first, then pivot
    /// clusters in creation order.
    pub clusters: Vec<Vec<VertexId>>,
    pub phase: Vec<Phase>,
    pub center: Vec<Option<VertexId>>,
    pub centers_order: Vec<VertexId>,
}

impl Clustering {
    /// Partition equality ignoring cluster ids and provenance.
    pub fn same_partition(&self, other: &Clustering) -> bool {
        self.n == other.n && canonical_labels(&self.cluster_of) == canonical_labels(&other.cluster_of)
    }

    pub fn phase_map(&self) -> BTreeMap<VertexId, &'static str> {
        (0..self.n)
            .map(|v| (v, self.phase[v as usize].as_str()))
            .collect()
    }

    pub fn cluster_count_nonempty(&self) -> usize {
        self.clusters.iter().filter(|c| !c.is_empty()).count()
    }
}

/// Relabel clusters by first appearance so partitions compare structurally.
pub fn canonical_labels(cluster_of: &[usize]) -> Vec<usize> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(cluster_of.len());
    for &c in cluster_of {
        let next = map.len();
        out.push(*map.entry(c).or_insert(next));
    }
    out
}

/// Arrival order for the online part: a permutation of V ∖ S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrivalOrder(Vec<VertexId>);

impl ArrivalOrder {
    pub fn new(order: Vec<VertexId>, n: u32, sample: &[VertexId]) -> Result<Self, EngineError> {
        let mut seen = vec![false; n as usize];
        for &v in &order {
            if v >= n {
                return Err(EngineError::VertexOutOfRange(v, n));
            }
            if sample.binary_search(&v).is_ok() {
                return Err(EngineError::BadOrder(format!("{v} is in the sample S")));
            }
            if seen[v as usize] {
                return Err(EngineError::BadOrder(format!("{v} listed twice")));
            }
            seen[v as usize] = true;
        }
        let expected = n as usize - sample.len();
        if order.len() != expected {
            return Err(EngineError::BadOrder(format!(
                "expected {expected} vertices, got {}",
                order.len()
            )));
        }
        Ok(ArrivalOrder(order))
    }

    /// V ∖ S in ascending id order.
    pub fn ascending(n: u32, sample: &[VertexId]) -> Self {
        ArrivalOrder(
            (0..n)
                .filter(|v| sample.binary_search(v).is_err())
                .collect(),
        )
    }

    /// Seeded uniform shuffle of V ∖ S.
    pub fn shuffled(n: u32, sample: &[VertexId], seed: u64) -> Self {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut order: Vec<VertexId> = (0..n)
            .filter(|v| sample.binary_search(v).is_err())
            .collect();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        ArrivalOrder(order)
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.0
    }
}

/// Live engine state; assignments are write-once.
pub struct EngineState<'g, 'c, G: EdgeOracle> {
    ctx: &'c MetricContext<'g, G>,
    centers: OrderedCenters,
    clusters: Vec<Vec<VertexId>>,
    assign: Vec<Option<Assignment>>,
    /// Arrival-ordered pools.
    ineligible_pool: Vec<VertexId>,
    eligible_pool: Vec<VertexId>,
    arrived: usize,
}

impl<'g, 'c, G: EdgeOracle> EngineState<'g, 'c, G> {
    /// Freeze the offline precomputation: ordered centers and their empty
    /// pre-clusters. Nothing has arrived yet.
    pub fn init(ctx: &'c MetricContext<'g, G>, bundle: &SubsampleBundle) -> Self {
        let centers = order_centers(ctx, bundle);
        let clusters = vec![Vec::new(); centers.len()];
        let n = ctx.graph().vertex_count() as usize;
        EngineState {
            ctx,
            centers,
            clusters,
            assign: vec![None; n],
            ineligible_pool: Vec::new(),
            eligible_pool: Vec::new(),
            arrived: 0,
        }
    }

    pub fn centers(&self) -> &OrderedCenters {
        &self.centers
    }

    pub fn assignment(&self, v: VertexId) -> Option<Assignment> {
        self.assign[v as usize]
    }

    pub fn pools(&self) -> (&[VertexId], &[VertexId]) {
        (&self.ineligible_pool, &self.eligible_pool)
    }

    /// Process one arrival and irrevocably assign it.
    pub fn arrive(&mut self, v: VertexId) -> Result<Assignment, EngineError> {
        let n = self.ctx.graph().vertex_count();
        if v >= n {
            return Err(EngineError::VertexOutOfRange(v, n));
        }
        if self.assign[v as usize].is_some() {
            return Err(EngineError::DoubleArrival(v));
        }

        let cr = self.ctx.constants().cr;
        let assignment = if self.ctx.is_eligible(v) {
            let claimed = self
                .centers
                .order
                .iter()
                .enumerate()
                .find(|&(_, &u)| self.ctx.adj_dist_le(u, v, cr));
            match claimed {
                Some((i, &center)) => {
                    self.clusters[i].push(v);
                    Assignment {
                        cluster: i,
                        phase: Phase::Preclustered,
                        center: Some(center),
                    }
                }
                None => {
                    let g = self.ctx.graph();
                    let ctx = self.ctx;
                    let cluster = attach_to_pool(
                        &self.eligible_pool,
                        &self.assign,
                        &mut self.clusters,
                        v,
                        |a, b| g.positive(a, b) && ctx.adj_dist_lt(a, b, cr),
                    );
                    self.eligible_pool.push(v);
                    Assignment {
                        cluster,
                        phase: Phase::PivotEligible,
                        center: None,
                    }
                }
            }
        } else {
            let g = self.ctx.graph();
            let cluster = attach_to_pool(
                &self.ineligible_pool,
                &self.assign,
                &mut self.clusters,
                v,
                |a, b| g.positive(a, b),
            );
            self.ineligible_pool.push(v);
            Assignment {
                cluster,
                phase: Phase::PivotIneligible,
                center: None,
            }
        };

        self.assign[v as usize] = Some(assignment);
        self.arrived += 1;
        Ok(assignment)
    }

    /// Consume the state once everything has arrived.
    pub fn finish(self, centers_order: Vec<VertexId>) -> Result<Clustering, EngineError> {
        let n = self.assign.len();
        if self.arrived != n {
            return Err(EngineError::Incomplete(n - self.arrived));
        }
        let mut cluster_of = vec![0usize; n];
        let mut phase = vec![Phase::PivotIneligible; n];
        let mut center = vec![None; n];
        for (v, a) in self.assign.iter().enumerate() {
            let a = a.expect("all arrived");
            cluster_of[v] = a.cluster;
            phase[v] = a.phase;
            center[v] = a.center;
        }
        Ok(Clustering {
            n: n as u32,
            cluster_of,
            clusters: self.clusters,
            phase,
            center,
            centers_order,
        })
    }
}

/// The incremental pool step: attach to the cluster of the earliest pool
/// member joined by a clusterable edge, else open a new cluster.
fn attach_to_pool(
    pool: &[VertexId],
    assign: &[Option<Assignment>],
    clusters: &mut Vec<Vec<VertexId>>,
    v: VertexId,
    clusterable: impl Fn(VertexId, VertexId) -> bool,
) -> usize {
    for &u in pool {
        if clusterable(u, v) {
            let cluster = assign[u as usize].expect("pool member is assigned").cluster;
            clusters[cluster].push(v);
            return cluster;
        }
    }
    clusters.push(vec![v]);
    clusters.len() - 1
}

/// Batch reference semantics for the pivot pools: process the pool in order,
/// each vertex joining the cluster of its earliest clusterable predecessor.
/// Returns the cluster index per pool position.
pub fn modified_pivot_batch(
    pool: &[VertexId],
    clusterable: impl Fn(VertexId, VertexId) -> bool,
) -> Vec<usize> {
    let mut cluster_of = Vec::with_capacity(pool.len());
    let mut next = 0usize;
    for (i, &v) in pool.iter().enumerate() {
        let attach = pool[..i].iter().position(|&u| clusterable(u, v));
        match attach {
            Some(j) => cluster_of.push(cluster_of[j]),
            None => {
                cluster_of.push(next);
                next += 1;
            }
        }
    }
    cluster_of
}

/// Run the whole algorithm: process S ascending, then the online order.
pub fn run<G: EdgeOracle>(
    g: &G,
    bundle: &SubsampleBundle,
    order: &ArrivalOrder,
) -> Result<Clustering, EngineError> {
    let ctx = MetricContext::estimated(g, bundle);
    run_with_ctx(&ctx, bundle, order)
}

/// Same as [`run`] but over a caller-built context (e.g. an audited graph).
pub fn run_with_ctx<G: EdgeOracle>(
    ctx: &MetricContext<'_, G>,
    bundle: &SubsampleBundle,
    order: &ArrivalOrder,
) -> Result<Clustering, EngineError> {
    let mut state = EngineState::init(ctx, bundle);
    let centers_order = state.centers().order.clone();
    for &v in &bundle.s {
        state.arrive(v)?;
    }
    for &v in order.as_slice() {
        state.arrive(v)?;
    }
    state.finish(centers_order)
}
