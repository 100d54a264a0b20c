//! Offline sample S and its split into four independent subsamples.
//!
//! Each vertex lands in S independently with probability ε. Members of S are
//! then assigned one of the 16 membership patterns over {S_p, S_d, S_b, S_r}
//! with the exact rational pattern probabilities (taking x = ε/2), which
//! makes the four subsamples mutually independent with per-vertex marginal
//! q(ε) = ε²/2.
//!
//! All randomness flows through per-vertex ChaCha streams keyed by
//! (seed, purpose, vertex), so results are reproducible and independent of
//! iteration order. Threshold comparisons are exact: a lazily-extended
//! dyadic uniform is compared against exact rational cumulative thresholds,
//! so the realized pattern distribution is the stated one, not a float
//! approximation.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::{SignedGraph, VertexId};

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("epsilon must satisfy 0 < ε < 1, got {0}")]
    EpsilonOutOfRange(String),
    #[error("cannot parse {0:?} as a rational in (0,1)")]
    EpsilonParse(String),
    #[error("subsample {name} contains {vertex}, which is not in S")]
    SubsampleNotInSample { name: &'static str, vertex: VertexId },
}

/// Exact rational sampling probability ε with 0 < ε < 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Epsilon {
    num: u64,
    den: u64,
}

impl Epsilon {
    pub fn new(num: u64, den: u64) -> Result<Self, SamplingError> {
        if den == 0 || num == 0 || num >= den {
            return Err(SamplingError::EpsilonOutOfRange(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Epsilon {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// The per-subsample marginal q(ε) = ε²/2.
    pub fn subsample_marginal(&self) -> BigRational {
        let e = self.to_big();
        &e * &e / BigRational::from_integer(2.into())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Epsilon {
    type Err = SamplingError;

    /// Accepts "a/b" or a decimal like "0.3" (parsed exactly as 3/10).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SamplingError::EpsilonParse(s.to_string());
        if let Some((a, b)) = s.split_once('/') {
            let num: u64 = a.trim().parse().map_err(|_| bad())?;
            let den: u64 = b.trim().parse().map_err(|_| bad())?;
            return Epsilon::new(num, den);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let int: u64 = if int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            let frac_val: u64 = frac.parse().map_err(|_| bad())?;
            let den = 10u64.pow(frac.len() as u32);
            let num = int
                .checked_mul(den)
                .and_then(|v| v.checked_add(frac_val))
                .ok_or_else(bad)?;
            return Epsilon::new(num, den);
        }
        let num: u64 = s.trim().parse().map_err(|_| bad())?;
        Epsilon::new(num, 1)
    }
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Epsilon {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// Stream tags keeping the membership draw and the pattern draw independent.
const STREAM_DRAW: u64 = 1;
const STREAM_SPLIT: u64 = 2;

fn vertex_rng(seed: u64, purpose: u64, v: VertexId) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 32) | u64::from(v));
    rng
}

/// A uniform U ∈ [0,1) revealed 64 bits at a time, supporting exact
/// comparison against rational thresholds. Comparisons against several
/// thresholds see the same underlying uniform.
struct LazyUniform<R: RngCore> {
    rng: R,
    prefix: BigInt,
    bits: u32,
}

impl<R: RngCore> LazyUniform<R> {
    fn new(rng: R) -> Self {
        LazyUniform {
            rng,
            prefix: BigInt::zero(),
            bits: 0,
        }
    }

    fn extend(&mut self) {
        self.prefix = (&self.prefix << 64) | BigInt::from(self.rng.next_u64());
        self.bits += 64;
    }

    /// Exact test U < q for q ∈ [0, 1].
    fn is_less_than(&mut self, q: &BigRational) -> bool {
        if q >= &BigRational::one() {
            return true;
        }
        if q.is_negative() || q.is_zero() {
            return false;
        }
        loop {
            if self.bits == 0 {
                self.extend();
            }
            // U lies in [prefix, prefix+1) / 2^bits.
            let scaled_q = q.numer() << self.bits;
            let low = &self.prefix * q.denom();
            if scaled_q <= low {
                return false;
            }
            let high = (&self.prefix + BigInt::one()) * q.denom();
            if scaled_q >= high {
                return true;
            }
            self.extend();
        }
    }
}

/// Index of each subsample in a 4-bit membership pattern.
pub const BIT_SP: usize = 0;
pub const BIT_SD: usize = 1;
pub const BIT_SB: usize = 2;
pub const BIT_SR: usize = 3;

/// Exact probabilities of the 16 membership patterns over
/// {S_p, S_d, S_b, S_r}, with x = ε/2.
#[derive(Debug, Clone)]
pub struct PatternDistribution {
    probs: [BigRational; 16],
}

/// Evaluate the pattern polynomials at x = ε/2 in exact arithmetic.
///
/// Per pattern cardinality k the probability is:
///   k=0: 1 − 4x + 6εx² − 4ε²x³ + ε³x⁴
///   k=1: x − 3εx² + 3ε²x³ − ε³x⁴
///   k=2: εx² − 2ε²x³ + ε³x⁴
///   k=3: ε²x³ − ε³x⁴
///   k=4: ε³x⁴
pub fn pattern_probs(eps: &Epsilon) -> PatternDistribution {
    let e = eps.to_big();
    let two = BigRational::from_integer(2.into());
    let x = &e / &two;
    let x2 = &x * &x;
    let x3 = &x2 * &x;
    let x4 = &x3 * &x;
    let e2 = &e * &e;
    let e3 = &e2 * &e;

    let big = |v: i64| BigRational::from_integer(v.into());
    let singleton = &x - big(3) * &e * &x2 + big(3) * &e2 * &x3 - &e3 * &x4;
    let pair = &e * &x2 - big(2) * &e2 * &x3 + &e3 * &x4;
    let triple = &e2 * &x3 - &e3 * &x4;
    let quadruple = &e3 * &x4;
    let empty = big(1) - big(4) * &x + big(6) * &e * &x2 - big(4) * &e2 * &x3 + &e3 * &x4;

    let probs: [BigRational; 16] = std::array::from_fn(|mask| match mask.count_ones() {
        0 => empty.clone(),
        1 => singleton.clone(),
        2 => pair.clone(),
        3 => triple.clone(),
        _ => quadruple.clone(),
    });

    let dist = PatternDistribution { probs };
    dist.assert_valid();
    dist
}

impl PatternDistribution {
    /// Probability of an exact membership pattern (4-bit mask).
    pub fn prob(&self, mask: usize) -> &BigRational {
        &self.probs[mask]
    }

    pub fn singleton(&self) -> &BigRational {
        &self.probs[1]
    }

    pub fn pair(&self) -> &BigRational {
        &self.probs[3]
    }

    pub fn triple(&self) -> &BigRational {
        &self.probs[7]
    }

    pub fn quadruple(&self) -> &BigRational {
        &self.probs[15]
    }

    pub fn empty(&self) -> &BigRational {
        &self.probs[0]
    }

    /// Cumulative thresholds over masks 0..=15, ending exactly at 1.
    pub fn cumulative(&self) -> [BigRational; 16] {
        let mut acc = BigRational::zero();
        std::array::from_fn(|i| {
            acc += &self.probs[i];
            acc.clone()
        })
    }

    /// Marginal P(v ∈ S_i | v ∈ S) for one subsample, summed exactly.
    pub fn conditional_marginal(&self, bit: usize) -> BigRational {
        (0..16)
            .filter(|mask| mask & (1 << bit) != 0)
            .map(|mask| self.probs[mask].clone())
            .sum()
    }

    fn assert_valid(&self) {
        let mut sum = BigRational::zero();
        for (mask, p) in self.probs.iter().enumerate() {
            assert!(
                !p.is_negative() && p <= &BigRational::one(),
                "pattern probability for mask {mask:#06b} outside [0,1]"
            );
            sum += p;
        }
        assert!(sum.is_one(), "pattern probabilities do not sum to 1");
    }
}

/// The sample S together with its four subsamples; all vertex lists sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsampleBundle {
    pub epsilon: Epsilon,
    pub seed: u64,
    #[serde(rename = "S")]
    pub s: Vec<VertexId>,
    #[serde(rename = "S_p")]
    pub s_p: Vec<VertexId>,
    #[serde(rename = "S_d")]
    pub s_d: Vec<VertexId>,
    #[serde(rename = "S_b")]
    pub s_b: Vec<VertexId>,
    #[serde(rename = "S_r")]
    pub s_r: Vec<VertexId>,
}

impl SubsampleBundle {
    /// Draw S and split it, deterministically from (n, ε, seed).
    pub fn draw(g: &SignedGraph, epsilon: Epsilon, seed: u64) -> Self {
        let s = draw_sample(g, epsilon, seed);
        split_subsamples(&s, epsilon, seed)
    }

    /// Assemble a bundle by hand (e.g. for the online-with-samples variant
    /// or tests); validates that every subsample is contained in S.
    pub fn from_parts(
        epsilon: Epsilon,
        seed: u64,
        s: Vec<VertexId>,
        s_p: Vec<VertexId>,
        s_d: Vec<VertexId>,
        s_b: Vec<VertexId>,
        s_r: Vec<VertexId>,
    ) -> Result<Self, SamplingError> {
        let mut bundle = SubsampleBundle {
            epsilon,
            seed,
            s,
            s_p,
            s_d,
            s_b,
            s_r,
        };
        bundle.s.sort_unstable();
        for (name, part) in [
            ("S_p", &mut bundle.s_p),
            ("S_d", &mut bundle.s_d),
            ("S_b", &mut bundle.s_b),
            ("S_r", &mut bundle.s_r),
        ] {
            part.sort_unstable();
            for &v in part.iter() {
                if bundle.s.binary_search(&v).is_err() {
                    return Err(SamplingError::SubsampleNotInSample { name, vertex: v });
                }
            }
        }
        Ok(bundle)
    }

    pub fn in_sample(&self, v: VertexId) -> bool {
        self.s.binary_search(&v).is_ok()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let bundle: SubsampleBundle = serde_json::from_str(text)?;
        Ok(bundle)
    }
}

/// Draw S ⊆ V: each vertex independently with probability exactly ε.
pub fn draw_sample(g: &SignedGraph, epsilon: Epsilon, seed: u64) -> Vec<VertexId> {
    draw_sample_n(g.n(), epsilon, seed)
}

pub fn draw_sample_n(n: u32, epsilon: Epsilon, seed: u64) -> Vec<VertexId> {
    let eps = epsilon.to_big();
    (0..n)
        .filter(|&v| LazyUniform::new(vertex_rng(seed, STREAM_DRAW, v)).is_less_than(&eps))
        .collect()
}

/// Assign each member of S one of the 16 membership patterns.
///
/// Deterministic per (S, ε, seed) and independent of the order of S.
pub fn split_subsamples(s: &[VertexId], epsilon: Epsilon, seed: u64) -> SubsampleBundle {
    let cum = pattern_probs(&epsilon).cumulative();
    let mut parts: [Vec<VertexId>; 4] = Default::default();
    let mut sorted = s.to_vec();
    sorted.sort_unstable();
    for &v in &sorted {
        let mut u = LazyUniform::new(vertex_rng(seed, STREAM_SPLIT, v));
        let mask = cum
            .iter()
            .position(|threshold| u.is_less_than(threshold))
            .expect("cumulative thresholds end at 1");
        for (bit, part) in parts.iter_mut().enumerate() {
            if mask & (1 << bit) != 0 {
                part.push(v);
            }
        }
    }
    let [s_p, s_d, s_b, s_r] = parts;
    SubsampleBundle {
        epsilon,
        seed,
        s: sorted,
        s_p,
        s_d,
        s_b,
        s_r,
    }
}
