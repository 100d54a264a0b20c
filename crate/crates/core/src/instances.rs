//! Generators for planted, random, and lower-bound instances, plus their
//! adversarial arrival orders.
//!
//! The two lower-bound gadgets: G₁ is a pair of positive cliques joined by a
//! single positive bridge edge (v₁, v₂); G₂ is one positive clique. A gadget
//! mix tiles V with independent coin-flip copies of the two, with no
//! positive edges across gadgets. The adversarial order schedules each
//! unsampled G₁ gadget's bridge endpoints before the rest of that gadget.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::ArrivalOrder;
use crate::graph::{SignedGraph, VertexId};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("bad parameters: {0}")]
    BadParams(String),
}

fn bad(msg: impl Into<String>) -> InstanceError {
    InstanceError::BadParams(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GadgetKind {
    G1,
    G2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetInfo {
    pub kind: GadgetKind,
    /// Contiguous member range [start, start + size).
    pub start: VertexId,
    pub size: u32,
    /// Bridge endpoints (v₁, v₂), present for G₁ gadgets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bridge: Option<(VertexId, VertexId)>,
}

impl GadgetInfo {
    pub fn members(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.start..self.start + self.size
    }
}

/// Sidecar metadata serialized next to a generated graph file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub schema: u32,
    pub kind: String,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Vec<Vec<VertexId>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gadgets: Option<Vec<GadgetInfo>>,
    /// Disagreement edges of the planted partition on the flipped graph.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planted_edge_cost: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: SignedGraph,
    pub meta: InstanceMeta,
}

/// What to generate; the CLI and sweeps are thin wrappers over this.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    Planted { n: u32, k: u32, flip: f64, seed: u64 },
    TwoCliques { n: u32 },
    Clique { n: u32 },
    GadgetMixRo { n: u32, delta: f64, gadget_size: Option<u32>, seed: u64 },
    GadgetMixAos { n: u32, eps: f64, gadget_size: Option<u32>, seed: u64 },
    RandomSign { n: u32, density: f64, seed: u64 },
}

impl InstanceSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            InstanceSpec::Planted { .. } => "planted",
            InstanceSpec::TwoCliques { .. } => "two_cliques",
            InstanceSpec::Clique { .. } => "clique",
            InstanceSpec::GadgetMixRo { .. } => "gadget_mix_ro",
            InstanceSpec::GadgetMixAos { .. } => "gadget_mix_aos",
            InstanceSpec::RandomSign { .. } => "random_sign",
        }
    }
}

/// k near-equal planted clusters; every pair's sign flipped independently.
/// Returns the graph with the ground-truth labels and realized flip count.
pub fn gen_planted(
    n: u32,
    k: u32,
    flip: f64,
    seed: u64,
) -> Result<(SignedGraph, PlantedTruth), InstanceError> {
    if k == 0 || k > n {
        return Err(bad(format!("need 1 ≤ k ≤ n, got k={k}, n={n}")));
    }
    if !(0.0..1.0).contains(&flip) {
        return Err(bad(format!("flip probability must be in [0,1), got {flip}")));
    }
    // Contiguous blocks; the first n % k blocks take the extra vertex.
    let base = n / k;
    let extra = n % k;
    let mut labels = Vec::with_capacity(n as usize);
    for c in 0..k {
        let size = base + u32::from(c < extra);
        labels.extend(std::iter::repeat_n(c, size as usize));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut flipped = 0u64;
    for u in 0..n {
        for v in (u + 1)..n {
            let same = labels[u as usize] == labels[v as usize];
            let positive = if flip > 0.0 && rng.gen_bool(flip) {
                flipped += 1;
                !same
            } else {
                same
            };
            if positive {
                edges.push((u, v));
            }
        }
    }
    let g = SignedGraph::from_edges(n, &edges).expect("generated edges are valid");
    Ok((g, PlantedTruth { labels, flipped }))
}

#[derive(Debug, Clone)]
pub struct PlantedTruth {
    pub labels: Vec<u32>,
    /// Number of flipped pairs = edge cost of the planted partition.
    pub flipped: u64,
}

impl PlantedTruth {
    pub fn clusters(&self) -> Vec<Vec<VertexId>> {
        let k = self.labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); k as usize];
        for (v, &c) in self.labels.iter().enumerate() {
            out[c as usize].push(v as VertexId);
        }
        out
    }
}

/// G₁: two positive cliques of size n/2 with one positive bridge (v₁, v₂).
pub fn gen_two_cliques(n: u32) -> Result<(SignedGraph, VertexId, VertexId), InstanceError> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(bad(format!("two-cliques instance needs even n ≥ 4, got {n}")));
    }
    let half = n / 2;
    let mut edges = clique_edges(0, half);
    edges.extend(clique_edges(half, half));
    let (v1, v2) = (0, half);
    edges.push((v1, v2));
    let g = SignedGraph::from_edges(n, &edges).expect("generated edges are valid");
    Ok((g, v1, v2))
}

fn clique_edges(start: u32, size: u32) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    for u in start..start + size {
        for v in (u + 1)..start + size {
            edges.push((u, v));
        }
    }
    edges
}

/// Each pair positive independently with the given probability.
pub fn gen_random_sign(
    n: u32,
    density: f64,
    seed: u64,
) -> Result<SignedGraph, InstanceError> {
    if !(0.0..=1.0).contains(&density) {
        return Err(bad(format!("density must be in [0,1], got {density}")));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    Ok(SignedGraph::from_edges(n, &edges).expect("generated edges are valid"))
}

/// Tile V with gadgets of the given size, each independently G₁ or G₂ with
/// probability 1/2; no positive edges between gadgets. When gadget_size does
/// not divide n, the last gadget absorbs the remainder (an odd-sized G₁
/// splits its cliques ⌈s/2⌉ / ⌊s/2⌋).
pub fn gen_gadget_mix(
    n: u32,
    gadget_size: u32,
    seed: u64,
) -> Result<(SignedGraph, Vec<GadgetInfo>), InstanceError> {
    if gadget_size < 4 || !gadget_size.is_multiple_of(2) {
        return Err(bad(format!(
            "gadget size must be even and ≥ 4, got {gadget_size}"
        )));
    }
    if n < gadget_size {
        return Err(bad(format!("n = {n} smaller than gadget size {gadget_size}")));
    }
    let count = n / gadget_size;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut gadgets = Vec::with_capacity(count as usize);
    for i in 0..count {
        let start = i * gadget_size;
        let size = if i + 1 == count {
            n - start
        } else {
            gadget_size
        };
        let kind = if rng.gen_bool(0.5) {
            GadgetKind::G1
        } else {
            GadgetKind::G2
        };
        let bridge = match kind {
            GadgetKind::G2 => {
                edges.extend(clique_edges(start, size));
                None
            }
            GadgetKind::G1 => {
                let first = size.div_ceil(2);
                edges.extend(clique_edges(start, first));
                edges.extend(clique_edges(start + first, size - first));
                let (v1, v2) = (start, start + first);
                edges.push((v1, v2));
                Some((v1, v2))
            }
        };
        gadgets.push(GadgetInfo {
            kind,
            start,
            size,
            bridge,
        });
    }
    let g = SignedGraph::from_edges(n, &edges).expect("generated edges are valid");
    Ok((g, gadgets))
}

/// Gadget size n^δ for the random-order construction (δ ≤ 1/3), rounded to
/// the nearest feasible even size.
pub fn ro_gadget_size(n: u32, delta: f64) -> u32 {
    even_at_least_4((f64::from(n)).powf(delta).round() as u32)
}

/// Gadget size log n / (4ε) for the sampled-model construction.
pub fn aos_gadget_size(n: u32, eps: f64) -> u32 {
    even_at_least_4((f64::from(n.max(2)).ln() / (4.0 * eps)).round() as u32)
}

fn even_at_least_4(s: u32) -> u32 {
    let s = s.max(4);
    s + s % 2
}

/// Schedule the online part V ∖ S: within each G₁ gadget untouched by the
/// sample, the bridge endpoints go first; gadgets interleave round-robin;
/// remaining positions fill in ascending id.
pub fn adversarial_order(
    gadgets: &[GadgetInfo],
    sample: &[VertexId],
    n: u32,
) -> Result<ArrivalOrder, InstanceError> {
    let covered: u32 = gadgets.iter().map(|g| g.size).sum();
    if covered != n {
        return Err(bad(format!(
            "gadget metadata covers {covered} vertices, graph has {n}"
        )));
    }
    let in_sample = |v: VertexId| sample.binary_search(&v).is_ok();
    let mut queues: Vec<std::collections::VecDeque<VertexId>> = gadgets
        .iter()
        .map(|gadget| {
            let unsampled = gadget.members().all(|v| !in_sample(v));
            let mut queue = std::collections::VecDeque::new();
            match gadget.bridge {
                Some((v1, v2)) if unsampled => {
                    queue.push_back(v1);
                    queue.push_back(v2);
                    queue.extend(gadget.members().filter(|&v| v != v1 && v != v2));
                }
                _ => queue.extend(gadget.members().filter(|&v| !in_sample(v))),
            }
            queue
        })
        .collect();
    let mut order = Vec::new();
    loop {
        let mut advanced = false;
        for queue in &mut queues {
            if let Some(v) = queue.pop_front() {
                order.push(v);
                advanced = true;
            }
        }
        if !advanced {
            break;
        }
    }
    ArrivalOrder::new(order, n, sample).map_err(|e| bad(e.to_string()))
}

/// Generate an instance with its sidecar metadata.
pub fn generate(spec: &InstanceSpec) -> Result<Instance, InstanceError> {
    let kind = spec.kind_name().to_string();
    match *spec {
        InstanceSpec::Planted { n, k, flip, seed } => {
            let (graph, truth) = gen_planted(n, k, flip, seed)?;
            Ok(Instance {
                graph,
                meta: InstanceMeta {
                    schema: 1,
                    kind,
                    params: serde_json::json!({"n": n, "k": k, "flip": flip, "seed": seed}),
                    ground_truth: Some(truth.clusters()),
                    gadgets: None,
                    planted_edge_cost: Some(truth.flipped),
                },
            })
        }
        InstanceSpec::Clique { n } => {
            let (graph, truth) = gen_planted(n, 1, 0.0, 0)?;
            Ok(Instance {
                graph,
                meta: InstanceMeta {
                    schema: 1,
                    kind,
                    params: serde_json::json!({"n": n}),
                    ground_truth: Some(truth.clusters()),
                    gadgets: None,
                    planted_edge_cost: Some(0),
                },
            })
        }
        InstanceSpec::TwoCliques { n } => {
            let (graph, v1, v2) = gen_two_cliques(n)?;
            let gadget = GadgetInfo {
                kind: GadgetKind::G1,
                start: 0,
                size: n,
                bridge: Some((v1, v2)),
            };
            Ok(Instance {
                graph,
                meta: InstanceMeta {
                    schema: 1,
                    kind,
                    params: serde_json::json!({"n": n, "v1": v1, "v2": v2}),
                    ground_truth: Some(vec![
                        (0..n / 2).collect(),
                        (n / 2..n).collect(),
                    ]),
                    gadgets: Some(vec![gadget]),
                    planted_edge_cost: Some(1),
                },
            })
        }
        InstanceSpec::GadgetMixRo {
            n,
            delta,
            gadget_size,
            seed,
        } => {
            let size = gadget_size.unwrap_or_else(|| ro_gadget_size(n, delta));
            let (graph, gadgets) = gen_gadget_mix(n, size, seed)?;
            Ok(Instance {
                graph,
                meta: InstanceMeta {
                    schema: 1,
                    kind,
                    params: serde_json::json!({
                        "n": n, "delta": delta, "gadget_size": size, "seed": seed
                    }),
                    ground_truth: None,
                    gadgets: Some(gadgets),
                    planted_edge_cost: None,
                },
            })
        }
        InstanceSpec::GadgetMixAos {
            n,
            eps,
            gadget_size,
            seed,
        } => {
            let size = gadget_size.unwrap_or_else(|| aos_gadget_size(n, eps));
            let (graph, gadgets) = gen_gadget_mix(n, size, seed)?;
            Ok(Instance {
                graph,
                meta: InstanceMeta {
                    schema: 1,
                    kind,
                    params: serde_json::json!({
                        "n": n, "eps": eps, "gadget_size": size, "seed": seed
                    }),
                    ground_truth: None,
                    gadgets: Some(gadgets),
                    planted_edge_cost: None,
                },
            })
        }
        InstanceSpec::RandomSign { n, density, seed } => {
            let graph = gen_random_sign(n, density, seed)?;
            Ok(Instance {
                graph,
                meta: InstanceMeta {
                    schema: 1,
                    kind,
                    params: serde_json::json!({"n": n, "density": density, "seed": seed}),
                    ground_truth: None,
                    gadgets: None,
                    planted_edge_cost: None,
                },
            })
        }
    }
}
