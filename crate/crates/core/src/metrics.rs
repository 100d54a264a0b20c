//! Correlation metric on a support set, its adjusted variant, and the
//! sample-estimated versions used online.
//!
//! For a support U, the correlation metric is
//! d^U(u,v) = 1 − |N_u⁺ ∩ N_v⁺ ∩ U| / |(N_u⁺ ∪ N_v⁺) ∩ U|, taken as 1 on an
//! empty support and 0 on the diagonal. The adjusted metric on (U, W) rounds
//! negative edges with d^U > 7/10 up to 1 and isolates any vertex u with
//! |R₁(u) ∩ W| ≥ (10/3)·|N_u⁺ ∩ U| to distance 1 from everything, where
//! R₁(u) = {v ∈ N_u⁻ : d^U(u,v) ≤ 7/10}.
//!
//! With U = S_d, W = S_r these are the estimated metrics d̄ and d̃; with
//! U = W = V they are the offline d and d*. All values are exact rationals;
//! every threshold comparison is exact.
//!
//! Neighborhood intersections read edges by iterating over the support,
//! so a query for (u, v) touches only edges incident to U ∪ W ∪ {u, v} —
//! the access pattern that keeps the estimated metrics computable online.

use std::fmt::Write as _;
use std::sync::OnceLock;

use num::{One, Signed};

use crate::dist::{AlgConstants, Dist, Rat};
use crate::graph::{in_pos_neighborhood, EdgeOracle, VertexId};
use crate::sampling::SubsampleBundle;

/// A subset of V with positions assigned for bitmask indexing.
#[derive(Debug, Clone)]
pub struct SubsetIndex {
    members: Vec<VertexId>,
    bit_of: Vec<u32>,
}

const NOT_MEMBER: u32 = u32::MAX;

impl SubsetIndex {
    pub fn new(n: u32, members: Vec<VertexId>) -> Self {
        let mut bit_of = vec![NOT_MEMBER; n as usize];
        for (i, &v) in members.iter().enumerate() {
            debug_assert!(v < n);
            bit_of[v as usize] = i as u32;
        }
        SubsetIndex { members, bit_of }
    }

    pub fn full(n: u32) -> Self {
        SubsetIndex::new(n, (0..n).collect())
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.bit_of[v as usize] != NOT_MEMBER
    }
}

/// Positive-neighborhood bitmask over a subset, with its popcount.
#[derive(Debug, Clone)]
struct PosMask {
    words: Box<[u64]>,
    count: u32,
}

/// Metric support (U), isolation counting set (W), and per-vertex caches.
///
/// Immutable after construction; the caches fill idempotently and are safe
/// for concurrent reads.
pub struct MetricContext<'g, G: EdgeOracle> {
    g: &'g G,
    consts: AlgConstants,
    support: SubsetIndex,
    isolation_set: SubsetIndex,
    masks: Vec<OnceLock<PosMask>>,
    isolated: Vec<OnceLock<bool>>,
}

impl<'g, G: EdgeOracle> MetricContext<'g, G> {
    /// Estimated metrics: U = S_d (distance sample), W = S_r (rounding sample).
    pub fn estimated(g: &'g G, bundle: &SubsampleBundle) -> Self {
        Self::with_support(g, bundle.s_d.clone(), bundle.s_r.clone())
    }

    /// Offline metrics d and d*: U = W = V.
    pub fn full(g: &'g G) -> Self {
        let n = g.vertex_count();
        let all: Vec<VertexId> = (0..n).collect();
        Self::with_support(g, all.clone(), all)
    }

    pub fn with_support(g: &'g G, support: Vec<VertexId>, isolation_set: Vec<VertexId>) -> Self {
        let n = g.vertex_count() as usize;
        MetricContext {
            g,
            consts: AlgConstants::verified(),
            support: SubsetIndex::new(n as u32, support),
            isolation_set: SubsetIndex::new(n as u32, isolation_set),
            masks: (0..n).map(|_| OnceLock::new()).collect(),
            isolated: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn graph(&self) -> &'g G {
        self.g
    }

    pub fn constants(&self) -> &AlgConstants {
        &self.consts
    }

    pub fn support(&self) -> &SubsetIndex {
        &self.support
    }

    pub fn isolation_set(&self) -> &SubsetIndex {
        &self.isolation_set
    }

    fn mask(&self, u: VertexId) -> &PosMask {
        self.masks[u as usize].get_or_init(|| {
            let m = self.support.len();
            let mut words = vec![0u64; m.div_ceil(64)].into_boxed_slice();
            let mut count = 0u32;
            for (i, &w) in self.support.members().iter().enumerate() {
                if in_pos_neighborhood(self.g, u, w) {
                    words[i / 64] |= 1 << (i % 64);
                    count += 1;
                }
            }
            PosMask { words, count }
        })
    }

    /// |N_u⁺ ∩ U| (self-loop included when u ∈ U).
    pub fn pos_count(&self, u: VertexId) -> u32 {
        self.mask(u).count
    }

    /// A vertex is eligible when its positive neighborhood meets the support.
    pub fn is_eligible(&self, v: VertexId) -> bool {
        self.pos_count(v) > 0
    }

    /// |N_u⁺ ∩ N_v⁺ ∩ U| and |(N_u⁺ ∪ N_v⁺) ∩ U| for distinct u, v.
    pub fn corr_counts(&self, u: VertexId, v: VertexId) -> (u32, u32) {
        debug_assert_ne!(u, v);
        let mu = self.mask(u);
        let mv = self.mask(v);
        let mut inter = 0u32;
        let mut union = 0u32;
        for (a, b) in mu.words.iter().zip(mv.words.iter()) {
            inter += (a & b).count_ones();
            union += (a | b).count_ones();
        }
        (inter, union)
    }

    /// The correlation metric on U: d̄ when U = S_d, d when U = V.
    pub fn corr_dist(&self, u: VertexId, v: VertexId) -> Dist {
        if u == v {
            return Dist::zero();
        }
        let (inter, union) = self.corr_counts(u, v);
        if union == 0 {
            return Dist::one();
        }
        Dist::new(i128::from(union - inter), i128::from(union))
    }

    /// Exact test d^U(u,v) ≤ ρ without building a rational.
    pub fn corr_dist_le(&self, u: VertexId, v: VertexId, rho: Rat) -> bool {
        if u == v {
            return !rho.is_negative();
        }
        let (inter, union) = self.corr_counts(u, v);
        if union == 0 {
            return rho >= Rat::one();
        }
        frac_le(union - inter, union, rho)
    }

    /// R₁(u): negative neighbors of u at correlation distance ≤ 7/10.
    pub fn r1_of(&self, u: VertexId) -> Vec<VertexId> {
        let n = self.g.vertex_count();
        let thr = self.consts.round_threshold;
        (0..n)
            .filter(|&v| {
                v != u && !self.g.positive(u, v) && self.corr_dist_le(u, v, thr)
            })
            .collect()
    }

    /// |R₁(u) ∩ W| ≥ (10/3)·|N_u⁺ ∩ U|, compared exactly.
    ///
    /// A vertex with no positive neighbor in the support is always isolated
    /// (both sides are then 0).
    pub fn is_isolated(&self, u: VertexId) -> bool {
        *self.isolated[u as usize].get_or_init(|| {
            let pos = i128::from(self.pos_count(u));
            let thr = self.consts.round_threshold;
            let mut r1_in_w: i128 = 0;
            for &w in self.isolation_set.members() {
                if w != u && !self.g.positive(u, w) && self.corr_dist_le(u, w, thr) {
                    r1_in_w += 1;
                }
            }
            self.consts.isolate_den * r1_in_w >= self.consts.isolate_num * pos
        })
    }

    /// The adjusted metric on (U, W): d̃ when (S_d, S_r), d* when (V, V).
    pub fn adj_dist(&self, u: VertexId, v: VertexId) -> Dist {
        if u == v {
            return Dist::zero();
        }
        if self.is_isolated(u) || self.is_isolated(v) {
            return Dist::one();
        }
        let base = self.corr_dist(u, v);
        if !self.g.positive(u, v) && base.value() > self.consts.round_threshold {
            return Dist::one();
        }
        base
    }

    /// Exact test d^{U,W}(u,v) ≤ ρ without building a rational.
    pub fn adj_dist_le(&self, u: VertexId, v: VertexId, rho: Rat) -> bool {
        self.adj_dist_within(u, v, rho, false)
    }

    /// Exact test d^{U,W}(u,v) < ρ.
    pub fn adj_dist_lt(&self, u: VertexId, v: VertexId, rho: Rat) -> bool {
        self.adj_dist_within(u, v, rho, true)
    }

    fn adj_dist_within(&self, u: VertexId, v: VertexId, rho: Rat, strict: bool) -> bool {
        let within = |num: u32, den: u32| {
            if strict {
                frac_lt(num, den, rho)
            } else {
                frac_le(num, den, rho)
            }
        };
        if u == v {
            return within(0, 1);
        }
        if self.is_isolated(u) || self.is_isolated(v) {
            return within(1, 1);
        }
        let (inter, union) = self.corr_counts(u, v);
        if union == 0 {
            return within(1, 1);
        }
        let num = union - inter;
        // Rounded-up negative edge: value is 1.
        if !self.g.positive(u, v) && !frac_le(num, union, self.consts.round_threshold) {
            return within(1, 1);
        }
        within(num, union)
    }

    /// Debug dump of both metrics for every pair, for oracle cross-checks.
    pub fn dump_csv(&self) -> String {
        let n = self.g.vertex_count();
        let mut out = String::from("u,v,dbar_num,dbar_den,dtilde_num,dtilde_den\n");
        for u in 0..n {
            for v in (u + 1)..n {
                let bar = self.corr_dist(u, v);
                let tilde = self.adj_dist(u, v);
                let _ = writeln!(
                    out,
                    "{u},{v},{},{},{},{}",
                    bar.numer(),
                    bar.denom(),
                    tilde.numer(),
                    tilde.denom()
                );
            }
        }
        out
    }
}

/// num/den ≤ ρ by cross-multiplication (den > 0, everything small).
fn frac_le(num: u32, den: u32, rho: Rat) -> bool {
    i128::from(num) * rho.denom() <= rho.numer() * i128::from(den)
}

fn frac_lt(num: u32, den: u32, rho: Rat) -> bool {
    i128::from(num) * rho.denom() < rho.numer() * i128::from(den)
}

/// One-off correlation metric on an explicit support, without a context.
pub fn corr_dist_on<G: EdgeOracle>(
    g: &G,
    support: &[VertexId],
    u: VertexId,
    v: VertexId,
) -> Dist {
    if u == v {
        return Dist::zero();
    }
    let mut inter = 0i128;
    let mut union = 0i128;
    for &w in support {
        let in_u = in_pos_neighborhood(g, u, w);
        let in_v = in_pos_neighborhood(g, v, w);
        if in_u && in_v {
            inter += 1;
        }
        if in_u || in_v {
            union += 1;
        }
    }
    if union == 0 {
        return Dist::one();
    }
    Dist::new(union - inter, union)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::AuditGraph;
    use crate::dist::rat;
    use crate::graph::SignedGraph;
    use crate::sampling::Epsilon;

    fn star3() -> SignedGraph {
        SignedGraph::from_edges(3, &[(0, 1), (0, 2)]).unwrap()
    }

    fn bundle_with(
        n_hint: &SignedGraph,
        s_d: Vec<u32>,
        s_r: Vec<u32>,
    ) -> SubsampleBundle {
        let mut s: Vec<u32> = s_d.iter().chain(s_r.iter()).copied().collect();
        s.sort_unstable();
        s.dedup();
        let _ = n_hint;
        SubsampleBundle::from_parts(
            Epsilon::new(1, 2).unwrap(),
            0,
            s,
            vec![],
            s_d,
            vec![],
            s_r,
        )
        .unwrap()
    }

    #[test]
    fn corr_dist_examples() {
        let g = star3();
        let ctx = MetricContext::full(&g);
        assert_eq!(ctx.corr_dist(0, 1), Dist::new(1, 3));
        assert_eq!(ctx.corr_dist(1, 2), Dist::new(2, 3));
        assert_eq!(ctx.corr_dist(1, 1), Dist::zero());
        // Empty support: everything at distance 1.
        let empty = MetricContext::with_support(&g, vec![], vec![]);
        assert_eq!(empty.corr_dist(0, 1), Dist::one());
    }

    #[test]
    fn est_corr_matches_full_when_sd_is_v() {
        let g = star3();
        let full = MetricContext::full(&g);
        let b = bundle_with(&g, vec![0, 1, 2], vec![]);
        let est = MetricContext::estimated(&g, &b);
        for u in 0..3 {
            for v in 0..3 {
                assert_eq!(est.corr_dist(u, v), full.corr_dist(u, v));
            }
        }
    }

    #[test]
    fn est_corr_on_singleton_support() {
        // S_d = {0}: d̄₀₁ = 1 − |{0}|/|{0}| = 0.
        let g = star3();
        let b = bundle_with(&g, vec![0], vec![]);
        let est = MetricContext::estimated(&g, &b);
        assert_eq!(est.corr_dist(0, 1), Dist::zero());
    }

    #[test]
    fn r1_examples() {
        // Clique: no negative neighbors at all.
        let clique = SignedGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let b = bundle_with(&clique, vec![0, 1, 2], vec![]);
        let ctx = MetricContext::estimated(&clique, &b);
        assert!(ctx.r1_of(1).is_empty());

        // E⁺ = {01, 02}, S_d = V: d̄₁₂ = 2/3 ≤ 7/10 so R₁(1) = {2}.
        let g = star3();
        let b = bundle_with(&g, vec![0, 1, 2], vec![]);
        let ctx = MetricContext::estimated(&g, &b);
        assert_eq!(ctx.r1_of(1), vec![2]);
    }

    #[test]
    fn r1_brute_force_cross_check() {
        // 5 vertices, E⁺ = {01, 02, 34, 24}, S_d = V: membership of every
        // pair decided by exact comparison against a direct set computation.
        let g = SignedGraph::from_edges(5, &[(0, 1), (0, 2), (3, 4), (2, 4)]).unwrap();
        let all: Vec<u32> = (0..5).collect();
        let b = bundle_with(&g, all.clone(), vec![]);
        let ctx = MetricContext::estimated(&g, &b);
        for u in 0..5u32 {
            let expected: Vec<u32> = (0..5u32)
                .filter(|&v| {
                    v != u
                        && !g.is_positive(u, v)
                        && corr_dist_on(&g, &all, u, v).value() <= rat(7, 10)
                })
                .collect();
            assert_eq!(ctx.r1_of(u), expected, "u = {u}");
        }
    }

    #[test]
    fn isolation_threshold_exact() {
        // Vertex 0 has one positive S_d-neighbor (vertex 9) and negative
        // neighbors 1..=4 sharing it, so d̄₀w = 0 for w in 1..=4.
        let edges: Vec<(u32, u32)> = vec![(0, 9), (1, 9), (2, 9), (3, 9), (4, 9)];
        let g = SignedGraph::from_edges(10, &edges).unwrap();

        // |R₁(0) ∩ S_r| = 4 ≥ 10/3 · 1 → isolated.
        let b = bundle_with(&g, vec![9], vec![1, 2, 3, 4]);
        let ctx = MetricContext::estimated(&g, &b);
        assert_eq!(ctx.pos_count(0), 1);
        assert!(ctx.is_isolated(0));

        // |R₁(0) ∩ S_r| = 3 < 10/3 · 1 → not isolated.
        let b = bundle_with(&g, vec![9], vec![1, 2, 3]);
        let ctx = MetricContext::estimated(&g, &b);
        assert!(!ctx.is_isolated(0));

        // Empty R₁ with a positive neighbor in the support → not isolated.
        let b = bundle_with(&g, vec![9], vec![]);
        let ctx = MetricContext::estimated(&g, &b);
        assert!(!ctx.is_isolated(0));
    }

    #[test]
    fn adjusted_metric_rounds_far_negative_edges() {
        // Path-ish graph: E⁺ = {01, 02, 23, 34}; d₀₃ = 4/5 > 7/10 rounds to 1.
        let g = SignedGraph::from_edges(5, &[(0, 1), (0, 2), (2, 3), (3, 4)]).unwrap();
        let ctx = MetricContext::full(&g);
        assert_eq!(ctx.corr_dist(0, 3), Dist::new(4, 5));
        assert_eq!(ctx.adj_dist(0, 3), Dist::one());
    }

    #[test]
    fn adjusted_metric_keeps_near_negative_edges() {
        // E⁺ = {01, 02}: d₁₂ = 2/3 ≤ 7/10, nobody isolated → d*₁₂ = 2/3.
        let g = star3();
        let ctx = MetricContext::full(&g);
        assert!(!ctx.is_isolated(0) && !ctx.is_isolated(1) && !ctx.is_isolated(2));
        assert_eq!(ctx.adj_dist(1, 2), Dist::new(2, 3));
    }

    #[test]
    fn no_support_neighbor_isolates() {
        // N_u⁺ ∩ S_d = ∅ forces d̃_uv = 1 for all v ≠ u.
        let g = star3();
        let b = bundle_with(&g, vec![1], vec![]);
        let ctx = MetricContext::estimated(&g, &b);
        assert_eq!(ctx.pos_count(2), 0);
        assert!(ctx.is_isolated(2));
        for v in [0u32, 1] {
            assert_eq!(ctx.adj_dist(2, v), Dist::one());
        }
    }

    #[test]
    fn eligibility_examples() {
        let g = star3();
        // v ∈ S_d is eligible through its self-loop.
        let b = bundle_with(&g, vec![1], vec![]);
        let ctx = MetricContext::estimated(&g, &b);
        assert!(ctx.is_eligible(1));
        // 0 is positive-adjacent to 1 ∈ S_d → eligible; 2 is not.
        assert!(ctx.is_eligible(0));
        assert!(!ctx.is_eligible(2));
    }

    #[test]
    fn domination_and_symmetry_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(2..16u32);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.4) {
                        edges.push((u, v));
                    }
                }
            }
            let g = SignedGraph::from_edges(n, &edges).unwrap();
            let members: Vec<u32> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let members_r: Vec<u32> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let b = bundle_with(&g, members, members_r);
            let ctx = MetricContext::estimated(&g, &b);
            for u in 0..n {
                for v in 0..n {
                    let bar = ctx.corr_dist(u, v);
                    let tilde = ctx.adj_dist(u, v);
                    assert_eq!(bar, ctx.corr_dist(v, u));
                    assert_eq!(tilde, ctx.adj_dist(v, u));
                    // d̃ dominates d̄ and only ever moves a value to 1.
                    assert!(tilde >= bar);
                    assert!(tilde == bar || tilde.is_one());
                    if u != v && ctx.is_isolated(u) {
                        assert!(tilde.is_one());
                    }
                }
            }
        }
    }

    #[test]
    fn threshold_tests_match_rational_comparisons() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
        let radii = [
            rat(0, 1),
            rat(16807, 1_080_000),
            rat(49, 200),
            rat(2401, 54000),
            rat(7, 10),
            rat(1, 1),
            rat(1, 3),
        ];
        for trial in 0..15 {
            let n = rng.gen_range(2..14u32);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.45) {
                        edges.push((u, v));
                    }
                }
            }
            let g = SignedGraph::from_edges(n, &edges).unwrap();
            let members: Vec<u32> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let members_r: Vec<u32> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let b = bundle_with(&g, members, members_r);
            let ctx = MetricContext::estimated(&g, &b);
            for u in 0..n {
                for v in 0..n {
                    for rho in radii {
                        let tilde = ctx.adj_dist(u, v).value();
                        assert_eq!(ctx.adj_dist_le(u, v, rho), tilde <= rho, "trial {trial}");
                        assert_eq!(ctx.adj_dist_lt(u, v, rho), tilde < rho, "trial {trial}");
                        let bar = ctx.corr_dist(u, v).value();
                        assert_eq!(ctx.corr_dist_le(u, v, rho), bar <= rho, "trial {trial}");
                    }
                }
            }
        }
    }

    #[test]
    fn estimated_metric_reads_only_sample_and_endpoint_edges() {
        // Computing d̃(u, v) must touch only edges incident to
        // S_d ∪ S_r ∪ {u, v}.
        let g = SignedGraph::from_edges(8, &[(0, 1), (1, 2), (2, 3), (4, 5), (6, 7)]).unwrap();
        let audit = AuditGraph::new(&g);
        let b = bundle_with(&g, vec![1, 4], vec![2, 6]);
        audit.reveal_all(&b.s);
        audit.reveal(0);
        audit.reveal(3);
        let ctx = MetricContext::estimated(&audit, &b);
        let _ = ctx.adj_dist(0, 3);
        assert!(
            audit.is_clean(),
            "illegal edge reads: {:?}",
            audit.illegal_accesses()
        );
    }

    #[test]
    fn dump_csv_shape() {
        let g = star3();
        let b = bundle_with(&g, vec![0, 1, 2], vec![0, 1, 2]);
        let ctx = MetricContext::estimated(&g, &b);
        let csv = ctx.dump_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "u,v,dbar_num,dbar_den,dtilde_num,dtilde_den");
        assert_eq!(lines.len(), 1 + 3);
        assert_eq!(lines[1], "0,1,1,3,1,3");
    }
}
