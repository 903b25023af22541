//! Closed-form load synthesis for the two modulators.
//!
//! Given the intended port currents, the main path picks the ABCD parameters
//! of both modulators so that both feed-side voltages equal the common feed
//! voltage, the input impedance equals `Z0`, and the feed voltage has zero
//! phase. One real degree of freedom `s` remains in the `c` entries.
//!
//! [`free_design`] holds the looser formulation parameterized by `(b1, c2)`
//! with no phase constraint; it is kept as an independent cross-check.

pub mod free_design;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antenna::{AntennaZMatrix, NormalizedZ};
use crate::beamspace::{self, BasisConfig, BeamspaceSymbolPair};
use crate::error::{Error, Result};
use crate::twoport::{self, NormalizedAbcd, ReactanceTuple, Topology, EPSILON_DIV};

/// Guard on `|η|` and on `|I1|` (relative to the larger port current).
pub const EPSILON_ETA: f64 = 1e-12;
pub const EPSILON_CURRENT: f64 = 1e-12;
/// Guard on the single `s/cos θ` term of `c2`.
pub const EPSILON_COS: f64 = 1e-12;

/// Port current ratio `η = I2 / I1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaRatio {
    pub eta_r: f64,
    pub eta_i: f64,
}

impl EtaRatio {
    pub fn new(eta_r: f64, eta_i: f64) -> Self {
        Self { eta_r, eta_i }
    }

    pub fn from_currents(i1: Complex64, i2: Complex64) -> Self {
        let eta = i2 / i1;
        Self::new(eta.re, eta.im)
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.eta_r, self.eta_i)
    }
}

/// Auxiliary combinations of the normalized Z-matrix and `η`.
///
/// `δ1± `/`δ2±` are the real/imaginary parts of `z11 + η·z12` and
/// `z21 + η·z22`; `Ω21`, `Ω22` are their projections on `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSet {
    pub d1m: f64,
    pub d1p: f64,
    pub d2m: f64,
    pub d2p: f64,
    pub delta12: f64,
    pub omega21: f64,
    pub omega22: f64,
}

pub fn compute_deltas(z: &NormalizedZ, eta: EtaRatio) -> DeltaSet {
    let (er, ei) = (eta.eta_r, eta.eta_i);
    let d1m = z.z11.re + er * z.z12.re - ei * z.z12.im;
    let d1p = z.z11.im + er * z.z12.im + ei * z.z12.re;
    let d2m = z.z21.re + er * z.z22.re - ei * z.z22.im;
    let d2p = z.z21.im + er * z.z22.im + ei * z.z22.re;
    DeltaSet {
        d1m,
        d1p,
        d2m,
        d2p,
        delta12: d1p * d2m - d1m * d2p,
        omega21: er * d1m + ei * d1p,
        omega22: er * d2m + ei * d2p,
    }
}

impl DeltaSet {
    /// `δ1− + Ω22`, the input power per `Z0·|I1|²`.
    pub fn power_factor(&self) -> f64 {
        self.d1m + self.omega22
    }

    fn checked_root(&self) -> Result<f64> {
        let p = self.power_factor();
        if !(p > 0.0) {
            return Err(Error::NegativeInputPower(p));
        }
        if self.d1m.abs() <= EPSILON_DIV {
            return Err(Error::SingularDelta(self.d1m));
        }
        if self.omega22.abs() <= EPSILON_DIV {
            return Err(Error::SingularOmega(self.omega22));
        }
        Ok(p.sqrt())
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let w = x.sin().atan2(x.cos());
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Phase `θ = φ + ∠s2 − ∠η` the current `I1` must have for a zero-phase feed.
pub fn target_theta(phi: f64, angle_s2: f64, eta: EtaRatio) -> Result<f64> {
    let eta = eta.as_complex();
    if eta.norm() <= EPSILON_ETA {
        return Err(Error::EtaUndefined(eta.norm()));
    }
    Ok(wrap_angle(phi + angle_s2 - eta.arg()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbSolution {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

/// `(a, b)` entries of both modulators, with the sign branch tied to `cos θ`.
pub fn solve_ab(deltas: &DeltaSet, theta: f64, eta: EtaRatio) -> Result<AbSolution> {
    let root = deltas.checked_root()?;
    let (s, c) = theta.sin_cos();
    let DeltaSet { d1m, d1p, d2m, d2p, omega22, .. } = *deltas;
    Ok(AbSolution {
        a1: c / d1m * root,
        b1: -(d1p * c + d1m * s) / d1m * root,
        a2: (eta.eta_r * c - eta.eta_i * s) / omega22 * root,
        b2: -(d2p * c + d2m * s) / omega22 * root,
    })
}

/// `(c1, c2)` for free parameter `s`.
pub fn solve_c(deltas: &DeltaSet, theta: f64, eta: EtaRatio, s: f64) -> Result<(f64, f64)> {
    let root = deltas.checked_root()?;
    let (sin, cos) = theta.sin_cos();
    let (er, ei) = (eta.eta_r, eta.eta_i);
    let c1 = -s / deltas.d1m - sin / root;
    let fixed = -(ei * cos + er * sin) / root;
    let c2 = if s == 0.0 {
        fixed
    } else {
        if cos.abs() < EPSILON_COS {
            return Err(Error::ThetaNearPole(cos));
        }
        (er * cos - ei * sin) / (deltas.omega22 * cos) * s + fixed
    };
    Ok((c1, c2))
}

/// `(cos θ, sin θ)` recovered from a synthesized `(a1, b1)`.
pub fn recovered_phase(deltas: &DeltaSet, a1: f64, b1: f64) -> (f64, f64) {
    let re = deltas.d1m * a1;
    let im = deltas.d1p * a1 + b1;
    let norm = re.hypot(im);
    (re / norm, -im / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    pub pin: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Input power and its split between the two antenna ports.
///
/// One branch may carry negative power; it then flows into the other
/// passive branch, never back to the source.
pub fn input_power(i1: Complex64, deltas: &DeltaSet, z0: f64) -> Result<PowerSplit> {
    let total = deltas.power_factor();
    if !(total > 0.0) {
        return Err(Error::NegativeInputPower(total));
    }
    let pin = z0 * i1.norm_sqr() * total;
    Ok(PowerSplit {
        pin,
        p1: deltas.d1m / total * pin,
        p2: deltas.omega22 / total * pin,
    })
}

/// Complete per-pair design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub pair: BeamspaceSymbolPair,
    pub abcd1: NormalizedAbcd,
    pub abcd2: NormalizedAbcd,
    pub loads1: ReactanceTuple,
    pub loads2: ReactanceTuple,
    pub theta: f64,
    pub s_param: f64,
    pub q: f64,
    pub i1: Complex64,
    pub i2: Complex64,
    /// Feed voltage predicted by the design relations; real and positive.
    pub vin: Complex64,
    pub power: PowerSplit,
    pub eta: EtaRatio,
    pub deltas: DeltaSet,
}

impl SynthesisResult {
    pub fn max_load_magnitude(&self) -> f64 {
        self.loads1.max_abs().max(self.loads2.max_abs())
    }
}

/// Target port currents and deltas for one pair, shared by every `s`.
#[derive(Debug, Clone, Copy)]
struct Targets {
    q: f64,
    i1: Complex64,
    i2: Complex64,
    eta: EtaRatio,
    deltas: DeltaSet,
    theta: f64,
    ab: AbSolution,
}

fn targets(pair: &BeamspaceSymbolPair, zm: &AntennaZMatrix, cfg: &BasisConfig) -> Result<Targets> {
    cfg.validate()?;
    if cfg.z0 != zm.z0() {
        return Err(Error::Config(format!(
            "basis reference impedance {} differs from antenna reference {}",
            cfg.z0,
            zm.z0()
        )));
    }
    let q = beamspace::power_norm_factor(pair, zm, cfg)?;
    let (i1, i2) = beamspace::currents_from_symbols(pair, cfg, q)?;
    let scale = i1.norm().max(i2.norm());
    if !(i1.norm() > EPSILON_CURRENT * scale) {
        return Err(Error::ZeroCurrentBranch(i1.norm()));
    }
    let eta = EtaRatio::from_currents(i1, i2);
    let deltas = compute_deltas(&zm.normalized(), eta);
    let theta = target_theta(cfg.phase_shift, pair.s2.arg(), eta)?;
    let ab = solve_ab(&deltas, theta, eta)?;
    Ok(Targets { q, i1, i2, eta, deltas, theta, ab })
}

fn assemble(
    pair: &BeamspaceSymbolPair,
    zm: &AntennaZMatrix,
    t: &Targets,
    topology: Topology,
    s: f64,
) -> Result<SynthesisResult> {
    let (c1, c2) = solve_c(&t.deltas, t.theta, t.eta, s)?;
    let AbSolution { a1, b1, a2, b2 } = t.ab;
    let abcd1 = NormalizedAbcd::from_abc(a1, b1, c1)?;
    let abcd2 = NormalizedAbcd::from_abc(a2, b2, c2)?;
    let loads1 = twoport::reactances_from_abcd(&abcd1, topology)?;
    let loads2 = twoport::reactances_from_abcd(&abcd2, topology)?;
    let d = &t.deltas;
    let vin = zm.z0() * t.i1 * Complex64::new(d.d1m * a1, d.d1p * a1 + b1);
    let power = input_power(t.i1, d, zm.z0())?;
    Ok(SynthesisResult {
        pair: *pair,
        abcd1,
        abcd2,
        loads1,
        loads2,
        theta: t.theta,
        s_param: s,
        q: t.q,
        i1: t.i1,
        i2: t.i2,
        vin,
        power,
        eta: t.eta,
        deltas: t.deltas,
    })
}

/// Full per-pair pipeline: normalization, currents, deltas, phase, `(a, b, c)`,
/// reciprocity completion and the reactance inversion for `topology`.
pub fn synthesize(
    pair: &BeamspaceSymbolPair,
    zm: &AntennaZMatrix,
    cfg: &BasisConfig,
    topology: Topology,
    s: f64,
) -> Result<SynthesisResult> {
    let t = targets(pair, zm, cfg)?;
    assemble(pair, zm, &t, topology, s)
}

/// Synthesizes at every `s` in `s_grid` and keeps the design with the smallest
/// largest normalized load magnitude. Values of `s` the topology cannot
/// realize are skipped; the first error is returned if none succeed.
pub fn synthesize_min_load(
    pair: &BeamspaceSymbolPair,
    zm: &AntennaZMatrix,
    cfg: &BasisConfig,
    topology: Topology,
    s_grid: &[f64],
) -> Result<SynthesisResult> {
    if s_grid.is_empty() {
        return Err(Error::Config("empty free-parameter grid".into()));
    }
    let t = targets(pair, zm, cfg)?;
    let mut best: Option<SynthesisResult> = None;
    let mut first_err = None;
    for &s in s_grid {
        match assemble(pair, zm, &t, topology, s) {
            Ok(r) => {
                if best.as_ref().map_or(true, |b| r.max_load_magnitude() < b.max_load_magnitude()) {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("grid is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fixture_pair(s2: Complex64) -> SynthesisResult {
        let zm = AntennaZMatrix::reference_fixture();
        let pair = BeamspaceSymbolPair::new(c(-1.0, 3.0), s2);
        synthesize(&pair, &zm, &BasisConfig::default(), Topology::TWithTl, 0.0).unwrap()
    }

    #[test]
    fn deltas_with_zero_eta() {
        let z = AntennaZMatrix::reference_fixture().normalized();
        let d = compute_deltas(&z, EtaRatio::new(0.0, 0.0));
        assert_eq!((d.d1m, d.d1p, d.d2m, d.d2p), (z.z11.re, z.z11.im, z.z21.re, z.z21.im));
        assert_eq!((d.omega21, d.omega22), (0.0, 0.0));
    }

    #[test]
    fn deltas_symmetric_unit_eta() {
        let z = AntennaZMatrix::reference_fixture().normalized();
        let d = compute_deltas(&z, EtaRatio::new(1.0, 0.0));
        assert_eq!(d.d1m, d.d2m);
        assert_eq!(d.d1p, d.d2p);
        assert_eq!(d.delta12, 0.0);
    }

    #[test]
    fn theta_examples() {
        let t = target_theta((-10.0f64).to_radians(), 45f64.to_radians(), EtaRatio::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(t, 35f64.to_radians(), epsilon = 1e-15);
        let t = target_theta(0.0, 0.0, EtaRatio::new(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(t, -PI / 2.0, epsilon = 1e-15);
        assert!(matches!(
            target_theta(0.0, 0.0, EtaRatio::new(0.0, 0.0)),
            Err(Error::EtaUndefined(_))
        ));
        assert_eq!(wrap_angle(-PI), PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn theta_is_phase_of_first_current() {
        let r = fixture_pair(c(-3.0, 3.0));
        assert_abs_diff_eq!(r.theta, r.i1.arg(), epsilon = 1e-12);
        // 0.060 − 0.043j
        assert_abs_diff_eq!(r.theta, (-0.043f64).atan2(0.060), epsilon = 2e-2);
    }

    #[test]
    fn ab_reduces_at_zero_theta() {
        let z = AntennaZMatrix::reference_fixture().normalized();
        let eta = EtaRatio::new(0.7, 0.0);
        let d = compute_deltas(&z, eta);
        let ab = solve_ab(&d, 0.0, eta).unwrap();
        let root = d.power_factor().sqrt();
        assert_relative_eq!(ab.a1, root / d.d1m, max_relative = 1e-15);
        assert_relative_eq!(ab.b1, -d.d1p * root / d.d1m, max_relative = 1e-15);
        assert_relative_eq!(ab.a2, 0.7 * root / d.omega22, max_relative = 1e-15);
        assert_relative_eq!(ab.b2, -d.d2p * root / d.omega22, max_relative = 1e-15);
    }

    #[test]
    fn equal_feed_voltage_relations_hold() {
        for s2 in [c(-3.0, 3.0), c(1.0, -1.0), c(3.0, -3.0), c(-1.0, 1.0)] {
            let r = fixture_pair(s2);
            let d = r.deltas;
            let (a1, b1, a2, b2) = (r.abcd1.a, r.abcd1.b, r.abcd2.a, r.abcd2.b);
            let (er, ei) = (r.eta.eta_r, r.eta.eta_i);
            // V'1 = V'2, real and imaginary parts
            assert_abs_diff_eq!(d.d1m * a1 - d.d2m * a2, -ei * b2, epsilon = 1e-12);
            assert_abs_diff_eq!(d.d1p * a1 - d.d2p * a2, er * b2 - b1, epsilon = 1e-12);
            // the b1-free parameterization of (a1, a2)
            assert_abs_diff_eq!(a1, (d.omega22 * b2 - d.d2m * b1) / d.delta12, epsilon = 1e-12);
            assert_abs_diff_eq!(a2, (d.omega21 * b2 - d.d1m * b1) / d.delta12, epsilon = 1e-12);
        }
    }

    #[test]
    fn matching_conditions_hold_for_any_s() {
        let zm = AntennaZMatrix::reference_fixture();
        let pair = BeamspaceSymbolPair::new(c(3.0, 1.0), c(-1.0, -3.0));
        for s in [-1.0, 0.0, 1.0] {
            let r = synthesize(&pair, &zm, &BasisConfig::default(), Topology::TWithTl, s).unwrap();
            let d = r.deltas;
            let (a1, b1, c1, d1) = (r.abcd1.a, r.abcd1.b, r.abcd1.c, r.abcd1.d);
            let (a2, b2, c2, d2) = (r.abcd2.a, r.abcd2.b, r.abcd2.c, r.abcd2.d);
            let (er, ei) = (r.eta.eta_r, r.eta.eta_i);
            assert_abs_diff_eq!(d.d1m * a1, d1 + er * d2 - d.d1p * c1 - d.d2p * c2, epsilon = 1e-12);
            assert_abs_diff_eq!(d.d1p * a1 + b1, ei * d2 + d.d1m * c1 + d.d2m * c2, epsilon = 1e-12);
            assert_abs_diff_eq!(
                d.d1m * c1 + (d.d2m - ei * b2 / a2) * c2,
                d.d1p * a1 + b1 - ei / a2,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                (d.d1p + b1 / a1) * c1 + (d.d2p + er * b2 / a2) * c2,
                1.0 / a1 + er / a2 - d.d1m * a1,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn c_at_zero_s() {
        let z = AntennaZMatrix::reference_fixture().normalized();
        let eta = EtaRatio::new(-0.4, 1.3);
        let d = compute_deltas(&z, eta);
        let theta = 0.3;
        let root = d.power_factor().sqrt();
        let (c1, c2) = solve_c(&d, theta, eta, 0.0).unwrap();
        assert_relative_eq!(c1, -theta.sin() / root, max_relative = 1e-15);
        assert_relative_eq!(c2, -(1.3 * theta.cos() - 0.4 * theta.sin()) / root, max_relative = 1e-15);
    }

    #[test]
    fn c_pole_guard() {
        let z = AntennaZMatrix::reference_fixture().normalized();
        let eta = EtaRatio::new(-0.4, 1.3);
        let d = compute_deltas(&z, eta);
        assert!(solve_c(&d, PI / 2.0, eta, 0.0).is_ok());
        assert!(matches!(solve_c(&d, PI / 2.0, eta, 1.0), Err(Error::ThetaNearPole(_))));
    }

    #[test]
    fn pivot_errors() {
        let eta = EtaRatio::new(0.0, 0.0);
        let z = AntennaZMatrix::reference_fixture().normalized();
        let d = compute_deltas(&z, eta);
        assert!(matches!(solve_ab(&d, 0.1, eta), Err(Error::SingularOmega(_))));
        let neg = DeltaSet { d1m: -1.0, omega22: 0.5, ..d };
        assert!(matches!(solve_ab(&neg, 0.1, eta), Err(Error::NegativeInputPower(_))));
        assert!(matches!(input_power(c(1.0, 0.0), &neg, 50.0), Err(Error::NegativeInputPower(_))));
        let tiny = DeltaSet { d1m: 1e-12, omega22: 0.5, ..d };
        assert!(matches!(solve_ab(&tiny, 0.1, eta), Err(Error::SingularDelta(_))));
    }

    #[test]
    fn single_branch_power_limit() {
        let z = AntennaZMatrix::reference_fixture().normalized();
        let d = compute_deltas(&z, EtaRatio::new(0.0, 0.0));
        let p = input_power(c(0.1, 0.0), &d, 50.0).unwrap();
        assert_eq!(p.p2, 0.0);
        assert_eq!(p.p1, p.pin);
    }

    #[test]
    fn reference_rows_power_split() {
        // rows 1, 5 and 7 of the reference design table
        let r = fixture_pair(c(-3.0, 3.0));
        assert_abs_diff_eq!(r.power.p1, 0.173, epsilon = 1e-3);
        assert_abs_diff_eq!(r.power.p2, 0.605, epsilon = 1e-3);
        assert_abs_diff_eq!(r.power.pin, 28.0 / 36.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.vin.re, 6.236, epsilon = 5e-4);

        let r = fixture_pair(c(-1.0, 3.0));
        assert_abs_diff_eq!(r.power.p1, -0.015, epsilon = 1e-3);
        assert_abs_diff_eq!(r.power.pin, 0.556, epsilon = 1e-3);

        let r = fixture_pair(c(-1.0, -1.0));
        assert_abs_diff_eq!(r.power.p1, 0.360, epsilon = 1e-3);
        assert_abs_diff_eq!(r.power.p2, -0.026, epsilon = 1e-3);
        assert!(r.power.pin > 0.0);
    }

    #[test]
    fn vin_is_real_positive_feed_voltage() {
        let zm = AntennaZMatrix::reference_fixture();
        let cfg = BasisConfig::default();
        for s1 in cfg.constellation.points() {
            for s2 in cfg.constellation.points() {
                let pair = BeamspaceSymbolPair::new(s1, s2);
                let r = synthesize(&pair, &zm, &cfg, Topology::TWithTl, 0.0).unwrap();
                let v = beamspace::feeding_voltage(&pair, &cfg);
                assert!(r.vin.im.abs() < 1e-9 * v);
                assert_relative_eq!(r.vin.re, v, max_relative = 1e-9);
                assert!(r.abcd1.reciprocity_residual().abs() < 1e-12);
                assert!(r.abcd2.reciprocity_residual().abs() < 1e-12);
                let (cos, sin) = recovered_phase(&r.deltas, r.abcd1.a, r.abcd1.b);
                assert_abs_diff_eq!(cos, r.theta.cos(), epsilon = 1e-12);
                assert_abs_diff_eq!(sin, r.theta.sin(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn min_load_selector() {
        let zm = AntennaZMatrix::reference_fixture();
        let cfg = BasisConfig::default();
        let pair = BeamspaceSymbolPair::new(c(1.0, 1.0), c(-3.0, 1.0));
        let grid: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.1).collect();
        let best = synthesize_min_load(&pair, &zm, &cfg, Topology::TWithTl, &grid).unwrap();
        for &s in &grid {
            if let Ok(r) = synthesize(&pair, &zm, &cfg, Topology::TWithTl, s) {
                assert!(best.max_load_magnitude() <= r.max_load_magnitude());
            }
        }
        assert!(synthesize_min_load(&pair, &zm, &cfg, Topology::TWithTl, &[]).is_err());
    }

    #[test]
    fn mismatched_reference_impedance_rejected() {
        let zm = AntennaZMatrix::reference_fixture();
        let cfg = BasisConfig { z0: 75.0, ..BasisConfig::default() };
        let pair = BeamspaceSymbolPair::new(c(1.0, 1.0), c(1.0, 1.0));
        assert!(matches!(
            synthesize(&pair, &zm, &cfg, Topology::TWithTl, 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn zero_first_current() {
        let zm = AntennaZMatrix::reference_fixture();
        let cfg = BasisConfig::default();
        let (g, r) = cfg.basis_terms().unwrap();
        // s1 = g/r · s2 cancels I1 exactly up to rounding
        let s2 = c(1.0, 0.0);
        let pair = BeamspaceSymbolPair::new(s2 * (g / r), s2);
        assert!(matches!(
            synthesize(&pair, &zm, &cfg, Topology::TWithTl, 0.0),
            Err(Error::ZeroCurrentBranch(_))
        ));
    }
}
