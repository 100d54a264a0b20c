//! Online correlation clustering seeded with a random vertex sample.
//!
//! A complete signed graph arrives vertex by vertex in adversarial order,
//! but an ε-fraction sample S of the vertices is known upfront. The sample
//! is split into four independent subsamples which drive everything the
//! algorithm precomputes: estimated correlation metrics on the distance
//! sample, rounding/isolation against the rounding sample, center densities
//! on the counting sample, and the static ordering of the center sample.
//! Arrivals are pre-clustered to the earliest nearby center or fall through
//! to one of two pivot pools, irrevocably.
//!
//! The crate also carries the evaluation side: ℓp disagreement costs, an
//! exact brute-force optimum for small instances, the classic pivot
//! baseline, fractional-cost diagnostics, a checker for the concentration
//! conditions the analysis relies on, and generators for planted and
//! lower-bound instances with their adversarial arrival orders.

pub mod audit;
pub mod centers;
pub mod cli;
pub mod cost;
pub mod dist;
pub mod engine;
pub mod goodevent;
pub mod graph;
pub mod instances;
pub mod metrics;
pub mod report;
pub mod sampling;
