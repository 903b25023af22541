//! Lossless two-port load modulators.
//!
//! Each modulator is a reactive T (with an optional line folded into the
//! ABCD form) or a reactive Π. Both are described by four real normalized
//! entries `(a, b, c, d)`:
//!
//! ```text
//! [V']   [ a        j·Z0·b ] [V]
//! [I'] = [ j·c/Z0   d      ] [I]
//! ```
//!
//! where `(V, I)` is the antenna side and `(V', I')` the feed side. Losslessness
//! and reciprocity reduce to `a·d + b·c = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivot threshold for inverting an ABCD back to reactances.
pub const EPSILON_DIV: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Topology {
    /// Series `x1`, shunt `y2`, series `x3`, followed by a line section.
    TWithTl,
    /// Shunt `y1`, series `x2`, shunt `y3`.
    PiNoTl,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::TWithTl => "T_WITH_TL",
            Topology::PiNoTl => "PI_NO_TL",
        }
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "T_WITH_TL" | "T" => Ok(Topology::TWithTl),
            "PI_NO_TL" | "PI" => Ok(Topology::PiNoTl),
            other => Err(Error::Config(format!("unknown topology {other:?}"))),
        }
    }
}

/// Real normalized ABCD entries of a lossless reciprocal two-port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedAbcd {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl NormalizedAbcd {
    pub const IDENTITY: NormalizedAbcd = NormalizedAbcd {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Builds the quadruple from `(a, b, c)`, completing `d` by reciprocity.
    pub fn from_abc(a: f64, b: f64, c: f64) -> Result<Self> {
        Ok(Self {
            a,
            b,
            c,
            d: complete_d(a, b, c)?,
        })
    }

    /// `a·d + b·c - 1`; zero for a lossless reciprocal network.
    ///
    /// Evaluated with error-free products, so the result is the residual of
    /// the stored entries themselves rather than of their rounded products.
    pub fn reciprocity_residual(&self) -> f64 {
        -deficit(self.a, self.d, self.b, self.c)
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Applies the network to antenna-side `(v, i)`, returning the feed side.
    pub fn propagate(&self, v: Complex64, i: Complex64, z0: f64) -> (Complex64, Complex64) {
        let j = Complex64::i();
        let v_out = self.a * v + j * z0 * self.b * i;
        let i_out = j * (self.c / z0) * v + self.d * i;
        (v_out, i_out)
    }
}

/// Three tunable reactance values of one modulator, normalized to `Z0`.
///
/// For [`Topology::TWithTl`] the triple is `(x1, y2, x3)`; for
/// [`Topology::PiNoTl`] it is `(y1, x2, y3)`. Reactances `x` scale as `X = x·Z0`
/// and susceptances `y` as `Y = y/Z0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactanceTuple {
    pub topology: Topology,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl ReactanceTuple {
    pub fn t_with_tl(x1: f64, y2: f64, x3: f64) -> Self {
        Self {
            topology: Topology::TWithTl,
            v1: x1,
            v2: y2,
            v3: x3,
        }
    }

    pub fn pi_no_tl(y1: f64, x2: f64, y3: f64) -> Self {
        Self {
            topology: Topology::PiNoTl,
            v1: y1,
            v2: x2,
            v3: y3,
        }
    }

    pub fn values(&self) -> [f64; 3] {
        [self.v1, self.v2, self.v3]
    }

    pub fn with_values(&self, values: [f64; 3]) -> Self {
        Self {
            topology: self.topology,
            v1: values[0],
            v2: values[1],
            v3: values[2],
        }
    }

    /// Physical values: ohms for reactances, siemens for susceptances.
    pub fn denormalized(&self, z0: f64) -> [f64; 3] {
        match self.topology {
            Topology::TWithTl => [self.v1 * z0, self.v2 / z0, self.v3 * z0],
            Topology::PiNoTl => [self.v1 / z0, self.v2 * z0, self.v3 / z0],
        }
    }

    /// Inverse of [`ReactanceTuple::denormalized`].
    pub fn from_physical(topology: Topology, physical: [f64; 3], z0: f64) -> Self {
        let [p1, p2, p3] = physical;
        match topology {
            Topology::TWithTl => Self::t_with_tl(p1 / z0, p2 * z0, p3 / z0),
            Topology::PiNoTl => Self::pi_no_tl(p1 * z0, p2 / z0, p3 * z0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.v1.abs().max(self.v2.abs()).max(self.v3.abs())
    }

    pub fn abcd(&self) -> NormalizedAbcd {
        match self.topology {
            Topology::TWithTl => abcd_from_t_with_tl(self.v1, self.v2, self.v3),
            Topology::PiNoTl => abcd_from_pi_no_tl(self.v1, self.v2, self.v3),
        }
    }
}

pub fn abcd_from_t_with_tl(x1: f64, y2: f64, x3: f64) -> NormalizedAbcd {
    let a = -y2;
    let b = 1.0 - x3 * y2;
    let c = 1.0 - x1 * y2;
    NormalizedAbcd {
        a,
        b,
        c,
        d: polish(a, -x3 - x1 * b, b, c),
    }
}

pub fn abcd_from_pi_no_tl(y1: f64, x2: f64, y3: f64) -> NormalizedAbcd {
    let b = 1.0 - x2 * y1;
    let c = 1.0 - x2 * y3;
    let d = -x2;
    NormalizedAbcd {
        a: polish(d, -y3 - y1 * c, b, c),
        b,
        c,
        d,
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `1 - p·q - b·c`, accurate to a few units in the last place of the result.
fn deficit(p: f64, q: f64, b: f64, c: f64) -> f64 {
    let (pq, e1) = two_prod(p, q);
    let (bc, e2) = two_prod(b, c);
    let (s, e3) = two_sum(1.0, -bc);
    let (s, e4) = two_sum(s, -pq);
    s + (e3 + e4 - e1 - e2)
}

/// Nudges the derived entry `q` so that `pivot·q + b·c = 1` holds to the
/// rounding of `q` itself. The formula value already agrees to a few ulps;
/// for small pivots its error contributes less than that and is left alone.
fn polish(pivot: f64, q: f64, b: f64, c: f64) -> f64 {
    if pivot.abs() < 1.0 || !q.is_finite() {
        return q;
    }
    q + deficit(pivot, q, b, c) / pivot
}

/// Recovers the reactance triple realizing `abcd` in the given topology.
///
/// The T network pivots on `a`, the Π network on `d`.
pub fn reactances_from_abcd(abcd: &NormalizedAbcd, topology: Topology) -> Result<ReactanceTuple> {
    match topology {
        Topology::TWithTl => {
            let a = abcd.a;
            if a.abs() <= EPSILON_DIV {
                return Err(Error::DegenerateTopology { pivot: a });
            }
            Ok(ReactanceTuple::t_with_tl(
                (abcd.c - 1.0) / a,
                -a,
                (abcd.b - 1.0) / a,
            ))
        }
        Topology::PiNoTl => {
            let d = abcd.d;
            if d.abs() <= EPSILON_DIV {
                return Err(Error::DegenerateTopology { pivot: d });
            }
            Ok(ReactanceTuple::pi_no_tl(
                (abcd.b - 1.0) / d,
                -d,
                (abcd.c - 1.0) / d,
            ))
        }
    }
}

/// `d = (1 - b·c) / a`.
pub fn complete_d(a: f64, b: f64, c: f64) -> Result<f64> {
    if a.abs() <= EPSILON_DIV {
        return Err(Error::DegenerateTopology { pivot: a });
    }
    let (bc, e) = two_prod(b, c);
    let (n, en) = two_sum(1.0, -bc);
    let d = n / a;
    Ok(d + ((-a).mul_add(d, n) + (en - e)) / a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn assert_abcd(got: NormalizedAbcd, want: [f64; 4]) {
        for (g, w) in [got.a, got.b, got.c, got.d].iter().zip(want) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-15);
        }
    }

    #[test]
    fn t_network_examples() {
        assert_abcd(abcd_from_t_with_tl(-1.0, -1.0, -1.0), [1.0, 0.0, 0.0, 1.0]);
        assert_abcd(abcd_from_t_with_tl(0.5, 2.0, -1.0), [-2.0, 3.0, 0.0, -0.5]);
        assert_abcd(abcd_from_t_with_tl(0.0, 1.0, 0.0), [-1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn pi_network_examples() {
        assert_abcd(abcd_from_pi_no_tl(-1.0, -1.0, -1.0), [1.0, 0.0, 0.0, 1.0]);
        assert_abcd(abcd_from_pi_no_tl(0.0, -2.0, 0.0), [0.0, 1.0, 1.0, 2.0]);
        assert_abcd(abcd_from_pi_no_tl(1.0, 0.0, 0.0), [-1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn inversion_examples() {
        let t = reactances_from_abcd(&NormalizedAbcd::IDENTITY, Topology::TWithTl).unwrap();
        assert_eq!(t.values(), [-1.0, -1.0, -1.0]);
        let t = reactances_from_abcd(&NormalizedAbcd::new(-2.0, 3.0, 0.0, -0.5), Topology::TWithTl)
            .unwrap();
        assert_eq!(t.values(), [0.5, 2.0, -1.0]);
        let err = reactances_from_abcd(&NormalizedAbcd::new(0.0, 1.0, 1.0, 2.0), Topology::TWithTl);
        assert!(matches!(err, Err(Error::DegenerateTopology { .. })));
        // the same quadruple is fine as a Π since d = 2
        let p = reactances_from_abcd(&NormalizedAbcd::new(0.0, 1.0, 1.0, 2.0), Topology::PiNoTl)
            .unwrap();
        assert_eq!(p.values(), [0.0, -2.0, 0.0]);
    }

    #[test]
    fn complete_d_examples() {
        assert_eq!(complete_d(1.0, 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(complete_d(-2.0, 3.0, 0.0).unwrap(), -0.5);
        assert_eq!(complete_d(2.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(complete_d(1e-10, 1.0, 1.0).is_err());
    }

    #[test]
    fn propagate_examples() {
        let z0 = 50.0;
        let (v, i) = NormalizedAbcd::IDENTITY.propagate(Complex64::new(1.0, 0.0), Complex64::new(0.02, 0.0), z0);
        assert_eq!((v, i), (Complex64::new(1.0, 0.0), Complex64::new(0.02, 0.0)));

        let abcd = NormalizedAbcd::new(-1.0, 1.0, 1.0, 0.0);
        let (v, i) = abcd.propagate(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), z0);
        assert_abs_diff_eq!(v.re, -1.0);
        assert_abs_diff_eq!(v.im, 0.0);
        assert_abs_diff_eq!(i.re, 0.0);
        assert_abs_diff_eq!(i.im, 0.02, epsilon = 1e-15);

        let (v, i) = NormalizedAbcd::IDENTITY.propagate(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), z0);
        assert_eq!((v, i), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn physical_values_round_trip() {
        let t = ReactanceTuple::t_with_tl(0.3, -1.2, 2.0);
        let phys = t.denormalized(50.0);
        assert_eq!(phys, [15.0, -0.024, 100.0]);
        let back = ReactanceTuple::from_physical(Topology::TWithTl, phys, 50.0);
        for (a, b) in back.values().iter().zip(t.values()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    proptest! {
        #[test]
        fn reciprocity_holds(v1 in -10.0f64..10.0, v2 in -10.0f64..10.0, v3 in -10.0f64..10.0) {
            let t = abcd_from_t_with_tl(v1, v2, v3);
            let p = abcd_from_pi_no_tl(v1, v2, v3);
            let scale_t = 1.0 + (t.a * t.d).abs() + (t.b * t.c).abs();
            let scale_p = 1.0 + (p.a * p.d).abs() + (p.b * p.c).abs();
            prop_assert!(t.reciprocity_residual().abs() <= 1e-12 * scale_t);
            prop_assert!(p.reciprocity_residual().abs() <= 1e-12 * scale_p);
        }

        #[test]
        fn lossless_power_transfer(
            v1 in -10.0f64..10.0, v2 in -10.0f64..10.0, v3 in -10.0f64..10.0,
            r in 1.0f64..200.0, x in -200.0f64..200.0, pi in any::<bool>(),
        ) {
            let tuple = if pi { ReactanceTuple::pi_no_tl(v1, v2, v3) } else { ReactanceTuple::t_with_tl(v1, v2, v3) };
            let abcd = tuple.abcd();
            let i = Complex64::new(0.02, -0.01);
            let v = Complex64::new(r, x) * i;
            let (vo, io) = abcd.propagate(v, i, 50.0);
            let p_in = (v * i.conj()).re;
            let p_out = (vo * io.conj()).re;
            let scale = (vo.norm() * io.norm()).max(p_in.abs());
            prop_assert!((p_in - p_out).abs() <= 1e-10 * scale);
        }
    }
}
