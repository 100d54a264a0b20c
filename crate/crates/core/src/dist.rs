//! Exact rational distances and the fixed algorithm constants.
//!
//! Every threshold the algorithm branches on (7/10, 49/200, 10/3, ...) is a
//! rational, and several of them coincide exactly (2δcr = 7/10), so all
//! distance values and comparisons are kept in exact rational arithmetic.
//! Floating point appears only in reported norms, never in a branch.

use std::fmt;

use num::rational::Ratio;
use num::{One, Signed, Zero};

/// Exact rational scalar used for distances and thresholds.
///
/// i128 gives ample headroom: distance denominators are bounded by the
/// support size (≤ n), and every comparison we form stays far below 2^127.
pub type Rat = Ratio<i128>;

pub fn rat(num: i128, den: i128) -> Rat {
    Ratio::new(num, den)
}

/// A metric value in [0, 1], canonical (gcd-reduced) rational.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dist(Rat);

impl Dist {
    pub const fn zero() -> Self {
        // Ratio::new_raw is const; 0/1 is canonical.
        Dist(Ratio::new_raw(0, 1))
    }

    pub const fn one() -> Self {
        Dist(Ratio::new_raw(1, 1))
    }

    /// Build from numerator/denominator; asserts the value lies in [0, 1].
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den > 0, "Dist denominator must be positive");
        let r = Ratio::new(num, den);
        assert!(
            !r.is_negative() && r <= Rat::one(),
            "Dist out of range: {num}/{den}"
        );
        Dist(r)
    }

    pub fn value(&self) -> Rat {
        self.0
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// One minus the value, again a valid distance.
    pub fn complement(&self) -> Dist {
        Dist(Rat::one() - self.0)
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

/// The fixed constants of the online algorithm, all exact rationals.
///
/// δ = 10/7 is the semi-metric stretch of the rounded estimated metric,
/// c = 2δ² + δ and r = 1/(2cδ²) are the pre-clustering scale and ball
/// radius, and t = r/(2δ) is the inner radius used by the diagnostics.
#[derive(Clone, Debug)]
pub struct AlgConstants {
    pub delta: Rat,
    pub c: Rat,
    pub r: Rat,
    /// Pre-clustering radius c·r = 49/200.
    pub cr: Rat,
    /// Inner ball radius t = r/(2δ) = 16807/1080000.
    pub t: Rat,
    /// Negative edges with estimated distance strictly above 7/10 round to 1.
    pub round_threshold: Rat,
    /// A vertex is isolated when |R₁(u) ∩ W| ≥ (10/3)·|N_u⁺ ∩ U|.
    pub isolate_num: i128,
    pub isolate_den: i128,
}

impl Default for AlgConstants {
    fn default() -> Self {
        AlgConstants {
            delta: rat(10, 7),
            c: rat(270, 49),
            r: rat(2401, 54000),
            cr: rat(49, 200),
            t: rat(16807, 1_080_000),
            round_threshold: rat(7, 10),
            isolate_num: 10,
            isolate_den: 3,
        }
    }
}

impl AlgConstants {
    /// The default constants, with every identity checked at construction.
    pub fn verified() -> Self {
        let consts = AlgConstants::default();
        consts
            .verify()
            .expect("algorithm constants failed their identities");
        consts
    }

    /// Check every identity the constants must satisfy, exactly.
    ///
    /// Returns the failed identity by name so diagnostics can surface it.
    pub fn verify(&self) -> Result<(), String> {
        let d = self.delta;
        let c = self.c;
        let r = self.r;
        let one = Rat::one();
        let two = rat(2, 1);

        let checks: Vec<(&str, bool)> = vec![
            ("delta = 10/7", d == rat(10, 7)),
            ("c = 2*delta^2 + delta", c == two * d * d + d),
            ("c = 270/49", c == rat(270, 49)),
            ("r = 1/(2*c*delta^2)", r == one / (two * c * d * d)),
            ("r = 2401/54000", r == rat(2401, 54000)),
            ("c*r = 49/200", c * r == self.cr && self.cr == rat(49, 200)),
            (
                "2*delta*c*r = 7/10",
                two * d * c * r == self.round_threshold && self.round_threshold == rat(7, 10),
            ),
            (
                "t = r/(2*delta) = 16807/1080000",
                self.t == r / (two * d) && self.t == rat(16807, 1_080_000),
            ),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(format!("constant identity failed: {name}"));
            }
        }

        // The two bound inequalities the analysis relies on:
        //   max{ 1/(cr/δ − r), 1/(1 − (δr + δ²cr + δr/2)) } ≤ 8
        //   max{ 1/(r/2 + cδr), 1/(cr) } ≤ 5
        let eight = rat(8, 1);
        let five = rat(5, 1);
        let lhs1a = one / (c * r / d - r);
        let lhs1b = one / (one - (d * r + d * d * c * r + d * r / two));
        if lhs1a > eight || lhs1b > eight {
            return Err("bound inequality (≤ 8) failed".to_string());
        }
        let lhs2a = one / (r / two + c * d * r);
        let lhs2b = one / (c * r);
        if lhs2a > five || lhs2b > five {
            return Err("bound inequality (≤ 5) failed".to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_verify() {
        AlgConstants::default().verify().unwrap();
    }

    #[test]
    fn constants_catch_drift() {
        let mut k = AlgConstants::default();
        k.cr = rat(1, 4);
        assert!(k.verify().is_err());
    }

    #[test]
    fn dist_bounds() {
        assert_eq!(Dist::new(1, 3).complement(), Dist::new(2, 3));
        assert!(Dist::new(0, 5).is_zero());
        assert!(Dist::new(7, 7).is_one());
        assert!(Dist::new(1, 3) < Dist::new(7, 10));
    }

    #[test]
    #[should_panic]
    fn dist_rejects_out_of_range() {
        let _ = Dist::new(3, 2);
    }
}
