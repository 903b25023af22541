//! Design parameterized by the free pair `(b1, c2)` without the feed-phase
//! constraint.
//!
//! Equal feed-side voltages pin `(a1, a2)` as linear functions of `(b1, b2)`.
//! Matching then requires `|V_in|²/Z0` to equal the power delivered to the
//! antenna, which is a quadratic in `b2`:
//!
//! ```text
//! b2 = δ1−/(S·Ω22) · (K·b1 ± Δ12·sgn(b1)·√(S·(δ1− + Ω22)/δ1−² − b1²))
//! S = δ1+² + δ1−²,   K = δ1−·δ2− + δ1+·δ2+
//! ```
//!
//! With both roots the two matching equations in `(c1, c2)` become dependent,
//! so `c2` is free and `c1` follows from either row.

use serde::{Deserialize, Serialize};

use super::{DeltaSet, EtaRatio};
use crate::error::{Error, Result};
use crate::twoport::{complete_d, EPSILON_DIV};

/// Which root of the `b2` quadratic to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    /// The root an existing `(b1, b2)` design lies on.
    pub fn matching(deltas: &DeltaSet, b1: f64, b2: f64) -> Branch {
        let s = deltas.d1p * deltas.d1p + deltas.d1m * deltas.d1m;
        let k = deltas.d1m * deltas.d2m + deltas.d1p * deltas.d2p;
        let excess = b2 * s * deltas.omega22 / deltas.d1m - k * b1;
        if excess * deltas.delta12 * sgn(b1) >= 0.0 {
            Branch::Plus
        } else {
            Branch::Minus
        }
    }
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeDesign {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub d1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub d2: f64,
}

/// Largest `|b1|` for which the `b2` quadratic has real roots.
pub fn b1_limit(deltas: &DeltaSet) -> f64 {
    let s = deltas.d1p * deltas.d1p + deltas.d1m * deltas.d1m;
    (s * deltas.power_factor()).max(0.0).sqrt() / deltas.d1m.abs()
}

pub fn solve_b2(deltas: &DeltaSet, b1: f64, branch: Branch) -> Result<f64> {
    let DeltaSet { d1m, d1p, d2m, d2p, delta12, omega22, .. } = *deltas;
    if delta12.abs() <= EPSILON_DIV {
        return Err(Error::Degenerate("delta12 vanishes; equal-voltage relations are dependent"));
    }
    if omega22.abs() <= EPSILON_DIV {
        return Err(Error::SingularOmega(omega22));
    }
    if d1m.abs() <= EPSILON_DIV {
        return Err(Error::SingularDelta(d1m));
    }
    let s = d1p * d1p + d1m * d1m;
    let k = d1m * d2m + d1p * d2p;
    let radicand = s * deltas.power_factor() / (d1m * d1m) - b1 * b1;
    if radicand < 0.0 {
        return Err(Error::Radicand(radicand));
    }
    let root = branch.sign() * delta12 * sgn(b1) * radicand.sqrt();
    Ok(d1m / (s * omega22) * (k * b1 + root))
}

/// Solves the remaining entries from free `b1` and `c2`.
pub fn solve(deltas: &DeltaSet, eta: EtaRatio, b1: f64, c2: f64, branch: Branch) -> Result<FreeDesign> {
    let b2 = solve_b2(deltas, b1, branch)?;
    let DeltaSet { d1m, d1p, d2m, delta12, omega21, omega22, .. } = *deltas;
    let a1 = (omega22 * b2 - d2m * b1) / delta12;
    let a2 = (omega21 * b2 - d1m * b1) / delta12;
    if a2.abs() <= EPSILON_DIV {
        return Err(Error::DegenerateTopology { pivot: a2 });
    }
    let ei = eta.eta_i;
    let c1 = (d1p * a1 + b1 - ei / a2 - (d2m - ei * b2 / a2) * c2) / d1m;
    let d1 = complete_d(a1, b1, c1)?;
    let d2 = complete_d(a2, b2, c2)?;
    Ok(FreeDesign { a1, b1, c1, d1, a2, b2, c2, d2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antenna::AntennaZMatrix;
    use crate::synthesis::{compute_deltas, solve_ab, solve_c};
    use approx::assert_relative_eq;

    fn fixture_deltas(eta: EtaRatio) -> DeltaSet {
        compute_deltas(&AntennaZMatrix::reference_fixture().normalized(), eta)
    }

    /// |V_in|²/Z0 == P_in, per Z0·|I1|².
    fn power_mismatch(d: &DeltaSet, f: &FreeDesign) -> f64 {
        (d.d1m * f.a1).powi(2) + (d.d1p * f.a1 + f.b1).powi(2) - d.power_factor()
    }

    #[test]
    fn both_roots_satisfy_matching_power() {
        let eta = EtaRatio::new(-1.2, 0.4);
        let d = fixture_deltas(eta);
        let lim = b1_limit(&d);
        for b1 in [-0.9 * lim, -0.2 * lim, 0.3 * lim, 0.99 * lim] {
            for branch in [Branch::Plus, Branch::Minus] {
                let f = solve(&d, eta, b1, 0.25, branch).unwrap();
                assert!(power_mismatch(&d, &f).abs() < 1e-12);
                assert_eq!(Branch::matching(&d, b1, f.b2), branch);
            }
        }
    }

    #[test]
    fn roots_coincide_at_limit() {
        let eta = EtaRatio::new(0.8, -0.6);
        let d = fixture_deltas(eta);
        let lim = b1_limit(&d);
        let p = solve_b2(&d, lim, Branch::Plus).unwrap();
        let m = solve_b2(&d, lim, Branch::Minus).unwrap();
        assert_relative_eq!(p, m, max_relative = 1e-7);
        assert!(matches!(solve_b2(&d, 1.01 * lim, Branch::Plus), Err(Error::Radicand(_))));
    }

    #[test]
    fn degenerate_for_equal_currents() {
        let eta = EtaRatio::new(1.0, 0.0);
        let d = fixture_deltas(eta);
        assert!(matches!(solve(&d, eta, 0.1, 0.0, Branch::Plus), Err(Error::Degenerate(_))));
    }

    #[test]
    fn reproduces_phase_constrained_design() {
        let eta = EtaRatio::new(-0.3, 1.7);
        let d = fixture_deltas(eta);
        for theta in [-2.5, -0.7, 0.0, 0.4, 1.9] {
            let ab = solve_ab(&d, theta, eta).unwrap();
            let (c1, c2) = solve_c(&d, theta, eta, 0.6).unwrap();
            let branch = Branch::matching(&d, ab.b1, ab.b2);
            let f = solve(&d, eta, ab.b1, c2, branch).unwrap();
            assert_relative_eq!(f.a1, ab.a1, max_relative = 1e-9);
            assert_relative_eq!(f.a2, ab.a2, max_relative = 1e-9);
            assert_relative_eq!(f.b2, ab.b2, max_relative = 1e-9);
            assert_relative_eq!(f.c1, c1, max_relative = 1e-9);
        }
    }
}
