//! Direct circuit solve of the feed, both modulators and the coupled antenna.
//!
//! Only the two-port propagation rule and `V = Z·I` are used here, never the
//! synthesis relations, so it serves as ground truth for synthesized loads.
//!
//! Both modulators share the feed voltage `V_in`. With antenna-side
//! `(V_i, I_i)` and `V = Z·I`:
//!
//! ```text
//! (a1·Z11 + j·Z0·b1)·I1 + a1·Z12·I2              = V_in
//! a2·Z21·I1              + (a2·Z22 + j·Z0·b2)·I2 = V_in
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antenna::AntennaZMatrix;
use crate::beamspace::{self, BasisConfig};
use crate::error::{Error, Result};
use crate::synthesis::SynthesisResult;
use crate::twoport::ReactanceTuple;

const SINGULAR_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub iin: Complex64,
    pub i1: Complex64,
    pub i2: Complex64,
    pub v1: Complex64,
    pub v2: Complex64,
    pub vin: Complex64,
    /// Feed-point input impedance; independent of `vin`.
    pub zin: Complex64,
    pub p1: f64,
    pub p2: f64,
    pub pin: f64,
    pub prad: f64,
}

#[derive(Debug, Clone, Copy)]
struct Response {
    i1: Complex64,
    i2: Complex64,
    v1: Complex64,
    v2: Complex64,
    iin: Complex64,
}

fn respond(loads1: &ReactanceTuple, loads2: &ReactanceTuple, zm: &AntennaZMatrix, vin: Complex64) -> Result<Response> {
    let j = Complex64::i();
    let z0 = zm.z0();
    let m1 = loads1.abcd();
    let m2 = loads2.abcd();
    let [[z11, z12], [z21, z22]] = zm.matrix();
    let e11 = m1.a * z11 + j * z0 * m1.b;
    let e12 = m1.a * z12;
    let e21 = m2.a * z21;
    let e22 = m2.a * z22 + j * z0 * m2.b;
    let det = e11 * e22 - e12 * e21;
    let scale = [e11, e12, e21, e22].iter().map(|e| e.norm()).fold(0.0, f64::max);
    if !(det.norm() > SINGULAR_REL * scale * scale) {
        return Err(Error::SingularNetwork(det.norm()));
    }
    let i1 = (e22 - e12) * vin / det;
    let i2 = (e11 - e21) * vin / det;
    let (v1, v2) = zm.port_voltages(i1, i2);
    let (_, f1) = m1.propagate(v1, i1, z0);
    let (_, f2) = m2.propagate(v2, i2, z0);
    Ok(Response { i1, i2, v1, v2, iin: f1 + f2 })
}

pub fn solve_network(
    loads1: &ReactanceTuple,
    loads2: &ReactanceTuple,
    zm: &AntennaZMatrix,
    vin: Complex64,
) -> Result<OracleSolution> {
    let unit = respond(loads1, loads2, zm, Complex64::new(1.0, 0.0))?;
    let r = respond(loads1, loads2, zm, vin)?;
    let p1 = (r.v1 * r.i1.conj()).re;
    let p2 = (r.v2 * r.i2.conj()).re;
    Ok(OracleSolution {
        iin: r.iin,
        i1: r.i1,
        i2: r.i2,
        v1: r.v1,
        v2: r.v2,
        vin,
        zin: 1.0 / unit.iin,
        p1,
        p2,
        pin: (vin * r.iin.conj()).re,
        prad: p1 + p2,
    })
}

/// Port currents when the network hangs off a source with EMF `emf` and
/// internal impedance `Z0`; a matched network sees `emf / 2`.
pub fn solve_with_source(
    loads1: &ReactanceTuple,
    loads2: &ReactanceTuple,
    zm: &AntennaZMatrix,
    emf: Complex64,
) -> Result<OracleSolution> {
    let unit = respond(loads1, loads2, zm, Complex64::new(1.0, 0.0))?;
    let zin = 1.0 / unit.iin;
    let vin = emf * zin / (zin + zm.z0());
    solve_network(loads1, loads2, zm, vin)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    /// `None` when the network could not be solved at all.
    pub solution: Option<OracleSolution>,
    pub error: Option<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Tolerances used by [`verify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `|Zin − Z0|`, ohms.
    pub zin_ohm: f64,
    /// Relative error on currents and powers.
    pub rel: f64,
    /// Feed phase, radians.
    pub phase_rad: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { zin_ohm: 1e-6, rel: 1e-9, phase_rad: 1e-9 }
    }
}

fn check(name: &'static str, residual: f64, tolerance: f64) -> Check {
    Check { name, residual, tolerance, passed: residual.is_finite() && residual < tolerance }
}

/// Solves a network built from raw loads and checks it against the intended
/// port currents `(i1, i2)`, the matched condition and power conservation.
pub fn verify_loads(
    loads1: &ReactanceTuple,
    loads2: &ReactanceTuple,
    zm: &AntennaZMatrix,
    vin: Complex64,
    targets: (Complex64, Complex64),
    target_power: f64,
    tol: &Tolerances,
) -> VerificationReport {
    let sol = match solve_network(loads1, loads2, zm, vin) {
        Ok(s) => s,
        Err(e) => return VerificationReport { checks: Vec::new(), solution: None, error: Some(e.to_string()) },
    };
    let (t1, t2) = targets;
    let scale = t1.norm().max(t2.norm());
    let current_err = (sol.i1 - t1).norm().max((sol.i2 - t2).norm()) / scale;
    // phase the feed would need for the oracle currents to line up with the targets
    let feed_phase = (t1 * sol.i1.conj() + t2 * sol.i2.conj()).arg().abs();
    let pin_ref = sol.pin.abs().max(f64::MIN_POSITIVE);
    let checks = vec![
        check("zin", (sol.zin - zm.z0()).norm(), tol.zin_ohm),
        check("currents", current_err, tol.rel),
        check("feed_phase", feed_phase, tol.phase_rad),
        check("branch_power_sum", (sol.p1 + sol.p2 - sol.pin).abs() / pin_ref, tol.rel),
        check("radiated_power", (sol.pin - target_power).abs() / pin_ref, tol.rel),
        check("positive_input_power", if sol.pin > 0.0 { 0.0 } else { f64::INFINITY }, 1.0),
    ];
    VerificationReport { checks, solution: Some(sol), error: None }
}

/// Checks a synthesized design: the feed is driven with `|result.vin|` at zero
/// phase.
pub fn verify(result: &SynthesisResult, zm: &AntennaZMatrix, cfg: &BasisConfig, tol: &Tolerances) -> VerificationReport {
    let vin = Complex64::new(result.vin.norm(), 0.0);
    let target_power = beamspace::target_radiated_power(&result.pair, cfg);
    let mut report = verify_loads(
        &result.loads1,
        &result.loads2,
        zm,
        vin,
        (result.i1, result.i2),
        target_power,
        tol,
    );
    if let Some(sol) = report.solution {
        let rel = (sol.p1 - result.power.p1).abs().max((sol.p2 - result.power.p2).abs()) / sol.pin.abs();
        report.checks.push(check("branch_split", rel, tol.rel));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamspace::BeamspaceSymbolPair;
    use crate::synthesis::synthesize;
    use crate::twoport::Topology;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    #[test]
    fn identity_modulators() {
        let zm = AntennaZMatrix::reference_fixture();
        let id = ReactanceTuple::t_with_tl(-1.0, -1.0, -1.0);
        let vin = c(3.0, 0.0);
        let sol = solve_network(&id, &id, &zm, vin).unwrap();
        let expect = vin / (zm.z11() + zm.z12());
        assert_close(sol.i1, expect, 1e-15);
        assert_close(sol.i2, expect, 1e-15);
        assert_close(sol.zin, (zm.z11() + zm.z12()) / 2.0, 1e-12);
        assert_close(sol.iin, sol.i1 + sol.i2, 1e-15);
    }

    #[test]
    fn zero_drive() {
        let zm = AntennaZMatrix::reference_fixture();
        let l1 = ReactanceTuple::t_with_tl(0.3, -1.1, 0.8);
        let l2 = ReactanceTuple::t_with_tl(-0.5, 0.9, 1.4);
        let sol = solve_network(&l1, &l2, &zm, c(0.0, 0.0)).unwrap();
        for z in [sol.iin, sol.i1, sol.i2, sol.v1, sol.v2] {
            assert_eq!(z, c(0.0, 0.0));
        }
        assert_eq!((sol.p1, sol.p2, sol.pin, sol.prad), (0.0, 0.0, 0.0, 0.0));
        assert!(sol.zin.norm().is_finite());
    }

    #[test]
    fn linearity_and_port_relation() {
        let zm = AntennaZMatrix::reference_fixture();
        let l1 = ReactanceTuple::pi_no_tl(0.3, -1.1, 0.8);
        let l2 = ReactanceTuple::t_with_tl(-0.5, 0.9, 1.4);
        let a = solve_network(&l1, &l2, &zm, c(1.0, 0.0)).unwrap();
        let alpha = c(-2.0, 1.5);
        let b = solve_network(&l1, &l2, &zm, alpha).unwrap();
        assert_close(b.i1, a.i1 * alpha, 1e-14);
        assert_close(b.v2, a.v2 * alpha, 1e-13);
        assert_abs_diff_eq!(b.pin, a.pin * alpha.norm_sqr(), epsilon = 1e-14);
        let (v1, v2) = zm.port_voltages(b.i1, b.i2);
        assert_close(v1, b.v1, 1e-12);
        assert_close(v2, b.v2, 1e-12);
        assert_abs_diff_eq!(b.pin, b.p1 + b.p2, epsilon = 1e-12);
    }

    #[test]
    fn synthesized_reference_row() {
        let zm = AntennaZMatrix::reference_fixture();
        let cfg = BasisConfig::default();
        let pair = BeamspaceSymbolPair::new(c(-1.0, 3.0), c(-3.0, 3.0));
        let r = synthesize(&pair, &zm, &cfg, Topology::TWithTl, 0.0).unwrap();
        let sol = solve_network(&r.loads1, &r.loads2, &zm, c(6.236, 0.0)).unwrap();
        assert_close(sol.zin, c(50.0, 0.0), 1e-9);
        assert_abs_diff_eq!(sol.p1, 0.173, epsilon = 1e-3);
        assert_abs_diff_eq!(sol.p2, 0.605, epsilon = 1e-3);
    }

    #[test]
    fn verify_reports() {
        let zm = AntennaZMatrix::reference_fixture();
        let cfg = BasisConfig::default();
        let pair = BeamspaceSymbolPair::new(c(1.0, -3.0), c(3.0, 1.0));
        let r = synthesize(&pair, &zm, &cfg, Topology::TWithTl, 0.0).unwrap();
        let tol = Tolerances::default();
        let ok = verify(&r, &zm, &cfg, &tol);
        assert!(ok.passed(), "{ok:?}");
        assert_eq!(ok, verify(&r, &zm, &cfg, &tol));

        let mut bad = r.clone();
        bad.loads1.v1 *= 1.05;
        let rep = verify(&bad, &zm, &cfg, &tol);
        assert!(!rep.passed());
        let zin = rep.check("zin").unwrap();
        assert!(!zin.passed && zin.residual > 1e-3);
        // power still conserved in a lossless network
        assert!(rep.check("branch_power_sum").unwrap().passed);
    }

    #[test]
    fn source_feed_matches_when_matched() {
        let zm = AntennaZMatrix::reference_fixture();
        let cfg = BasisConfig::default();
        let pair = BeamspaceSymbolPair::new(c(1.0, -3.0), c(3.0, 1.0));
        let r = synthesize(&pair, &zm, &cfg, Topology::TWithTl, 0.0).unwrap();
        let direct = solve_network(&r.loads1, &r.loads2, &zm, r.vin).unwrap();
        let sourced = solve_with_source(&r.loads1, &r.loads2, &zm, 2.0 * r.vin).unwrap();
        assert_close(direct.i1, sourced.i1, 1e-12);
        assert_close(direct.i2, sourced.i2, 1e-12);
    }

    #[test]
    fn singular_network() {
        // Z11 + Z12 purely reactive: the even mode with a/b = -Z0/|Z11 + Z12| draws no current
        let zm = AntennaZMatrix::symmetric(c(50.0, 10.0), c(-50.0, 5.0), 50.0).unwrap();
        let lm = ReactanceTuple::t_with_tl(0.0, 1.0, 0.7);
        assert_abs_diff_eq!(lm.abcd().a / lm.abcd().b, -50.0 / 15.0, epsilon = 1e-12);
        let res = solve_network(&lm, &lm, &zm, c(1.0, 0.0));
        assert!(matches!(res, Err(Error::SingularNetwork(_))), "{res:?}");
    }
}
