//! Ball queries and the static ordering of the center sample S_p by
//! estimated density on the counting sample S_b.
//!
//! The ordering is computed once from the offline sample and never changes
//! during a run. Ties in density break by ascending vertex id so the order
//! is reproducible from the serialized bundle alone.

use crate::dist::Rat;
use crate::graph::{EdgeOracle, VertexId};
use crate::metrics::MetricContext;
use crate::sampling::SubsampleBundle;

/// Centers sorted by (density descending, vertex id ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedCenters {
    pub order: Vec<VertexId>,
    /// densities[i] = |Ball_{d̃}^{S_b}(order[i], r)|, non-increasing.
    pub densities: Vec<usize>,
}

impl OrderedCenters {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Ball_{d̃}^{restrict}(center, ρ) = {v ∈ restrict : d̃(center, v) ≤ ρ};
/// `None` restricts to all of V. The radius comparison is non-strict, so the
/// center itself is included whenever it lies in the restriction.
pub fn ball<G: EdgeOracle>(
    ctx: &MetricContext<'_, G>,
    center: VertexId,
    rho: Rat,
    restrict: Option<&[VertexId]>,
) -> Vec<VertexId> {
    let within = |v: VertexId| ctx.adj_dist_le(center, v, rho);
    match restrict {
        Some(set) => set.iter().copied().filter(|&v| within(v)).collect(),
        None => (0..ctx.graph().vertex_count()).filter(|&v| within(v)).collect(),
    }
}

/// Estimated density of a center: |Ball_{d̃}^{S_b}(u, r)|.
///
/// Defined only for u ∈ S_p; everything read lives inside the sample.
pub fn est_density<G: EdgeOracle>(
    ctx: &MetricContext<'_, G>,
    bundle: &SubsampleBundle,
    u: VertexId,
) -> usize {
    assert!(
        bundle.s_p.binary_search(&u).is_ok(),
        "est_density: {u} is not a center (not in S_p)"
    );
    ball(ctx, u, ctx.constants().r, Some(&bundle.s_b)).len()
}

/// Order S_p by estimated density, ties broken by ascending vertex id.
pub fn order_centers<G: EdgeOracle>(
    ctx: &MetricContext<'_, G>,
    bundle: &SubsampleBundle,
) -> OrderedCenters {
    let mut with_density: Vec<(VertexId, usize)> = bundle
        .s_p
        .iter()
        .map(|&u| (u, est_density(ctx, bundle, u)))
        .collect();
    with_density.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    OrderedCenters {
        order: with_density.iter().map(|&(u, _)| u).collect(),
        densities: with_density.iter().map(|&(_, d)| d).collect(),
    }
}
