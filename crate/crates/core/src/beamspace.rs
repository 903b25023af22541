//! Beamspace symbol mapping: from a pair of constellation symbols to the two
//! antenna port currents, the power-normalization factor and the feed voltage.
//!
//! Stream `n` weights the `n`-th orthonormal basis pattern of the two-element
//! array. The port currents are
//!
//! ```text
//! I1 = q·e^{jφ}/√(2π) · (s1 − g/r · s2)
//! I2 = q·e^{jφ}/√(2π) · s2 / r
//! ```
//!
//! with `g = J0(b)` and `r = √(1 − g²)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antenna::AntennaZMatrix;
use crate::error::{Error, Result};

/// First positive zero of `J0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

const J0_MAX_TERMS: usize = 60;

/// `I0(jb) = J0(b)` by its ascending series `Σ (−1)^k (b/2)^{2k} / (k!)²`.
///
/// For `|b| ≤ 3` the series converges to full double precision in well under
/// 30 terms.
pub fn bessel_i0_of_jb(b: f64) -> f64 {
    let x = 0.25 * b * b;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..J0_MAX_TERMS {
        let kf = k as f64;
        term *= -x / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Square QAM alphabet with Gray labeling on each axis.
///
/// Points sit on the odd-integer grid `{±1, ±3, …}`; there is no energy
/// normalization, all scaling flows through `q` and the feed voltage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    levels: Vec<f64>,
    bits_per_axis: u32,
}

impl Constellation {
    /// `order` must be an even power of two (4, 16, 64, ...).
    pub fn square_qam(order: usize) -> Result<Self> {
        let bits = order.trailing_zeros();
        if order < 4 || !order.is_power_of_two() || bits % 2 != 0 {
            return Err(Error::Config(format!("{order}-QAM is not a square constellation")));
        }
        let bits_per_axis = bits / 2;
        let side = 1usize << bits_per_axis;
        let levels = (0..side).map(|i| 2.0 * i as f64 - (side as f64 - 1.0)).collect();
        Ok(Self { levels, bits_per_axis })
    }

    pub fn qam16() -> Self {
        Self::square_qam(16).expect("16 is square")
    }

    /// Per-axis amplitude levels in ascending order.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn side(&self) -> usize {
        self.levels.len()
    }

    pub fn order(&self) -> usize {
        self.side() * self.side()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        2 * self.bits_per_axis
    }

    pub fn max_energy(&self) -> f64 {
        let m = self.levels.last().copied().unwrap_or(0.0);
        2.0 * m * m
    }

    pub fn mean_energy(&self) -> f64 {
        let per_axis: f64 = self.levels.iter().map(|l| l * l).sum::<f64>() / self.side() as f64;
        2.0 * per_axis
    }

    /// Symbol carrying `label`; the high half of the bits selects the
    /// in-phase level, the low half the quadrature level, each Gray coded.
    pub fn modulate(&self, label: u32) -> Complex64 {
        let mask = (1u32 << self.bits_per_axis) - 1;
        let i_idx = gray_decode(label >> self.bits_per_axis);
        let q_idx = gray_decode(label & mask);
        Complex64::new(self.levels[i_idx as usize], self.levels[q_idx as usize])
    }

    /// All symbols indexed by label.
    pub fn points(&self) -> Vec<Complex64> {
        (0..self.order() as u32).map(|l| self.modulate(l)).collect()
    }

    /// Nearest-point label (per-axis slicing).
    pub fn slice(&self, s: Complex64) -> u32 {
        let i = gray_encode(self.nearest_level(s.re) as u32);
        let q = gray_encode(self.nearest_level(s.im) as u32);
        (i << self.bits_per_axis) | q
    }

    fn nearest_level(&self, x: f64) -> usize {
        let side = self.side() as f64;
        let idx = ((x + side - 1.0) / 2.0).round();
        idx.clamp(0.0, side - 1.0) as usize
    }

    /// Whether `s` lies exactly on the grid.
    pub fn contains(&self, s: Complex64) -> bool {
        self.levels.contains(&s.re) && self.levels.contains(&s.im)
    }
}

fn gray_encode(x: u32) -> u32 {
    x ^ (x >> 1)
}

fn gray_decode(mut g: u32) -> u32 {
    let mut x = g;
    while g > 1 {
        g >>= 1;
        x ^= g;
    }
    x
}

/// One symbol per beamspace stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamspaceSymbolPair {
    pub s1: Complex64,
    pub s2: Complex64,
}

impl BeamspaceSymbolPair {
    pub fn new(s1: Complex64, s2: Complex64) -> Self {
        Self { s1, s2 }
    }

    pub fn energy(&self) -> f64 {
        self.s1.norm_sqr() + self.s2.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisConfig {
    /// Bessel argument of the basis construction, `2π·d/λ` for spacing `d`.
    pub b: f64,
    /// Common phase rotation of both streams, radians.
    pub phase_shift: f64,
    /// Source reference impedance, ohms.
    pub z0: f64,
    /// Radiated power of the highest-energy symbol pair, watts.
    pub prad_max: f64,
    pub constellation: Constellation,
}

impl Default for BasisConfig {
    /// λ/8 spacing (`b = π/4`), −10° phase shift, 50 Ω, 1 W, 16-QAM.
    fn default() -> Self {
        Self {
            b: PI / 4.0,
            phase_shift: (-10.0f64).to_radians(),
            z0: 50.0,
            prad_max: 1.0,
            constellation: Constellation::qam16(),
        }
    }
}

impl BasisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b < J0_FIRST_ZERO) {
            return Err(Error::Config(format!("b = {} outside (0, {J0_FIRST_ZERO})", self.b)));
        }
        if !(self.prad_max > 0.0) {
            return Err(Error::Config("maximum radiated power must be positive".into()));
        }
        if !(self.z0 > 0.0) {
            return Err(Error::Config("reference impedance must be positive".into()));
        }
        if !self.phase_shift.is_finite() {
            return Err(Error::Config("phase shift must be finite".into()));
        }
        Ok(())
    }

    /// `(g, r) = (J0(b), √(1 − g²))`.
    pub fn basis_terms(&self) -> Result<(f64, f64)> {
        let g = bessel_i0_of_jb(self.b);
        let r2 = 1.0 - g * g;
        if !(r2 > 0.0) || !r2.is_finite() {
            return Err(Error::InvalidBasis(r2));
        }
        Ok((g, r2.sqrt()))
    }

    fn pair_max_energy(&self) -> f64 {
        2.0 * self.constellation.max_energy()
    }
}

/// Port currents carrying `pair` for normalization factor `q`.
pub fn currents_from_symbols(
    pair: &BeamspaceSymbolPair,
    cfg: &BasisConfig,
    q: f64,
) -> Result<(Complex64, Complex64)> {
    let (g, r) = cfg.basis_terms()?;
    let scale = Complex64::from_polar(q / (2.0 * PI).sqrt(), cfg.phase_shift);
    let i1 = scale * (pair.s1 - pair.s2 * (g / r));
    let i2 = scale * pair.s2 / r;
    Ok((i1, i2))
}

/// Inverse of [`currents_from_symbols`]: the beamspace symbols a pair of port
/// currents actually carries, for a given `q`.
pub fn symbols_from_currents(
    i1: Complex64,
    i2: Complex64,
    cfg: &BasisConfig,
    q: f64,
) -> Result<BeamspaceSymbolPair> {
    let (g, r) = cfg.basis_terms()?;
    let unscale = Complex64::from_polar((2.0 * PI).sqrt() / q, -cfg.phase_shift);
    let s2 = unscale * i2 * r;
    let s1 = unscale * i1 + s2 * (g / r);
    Ok(BeamspaceSymbolPair { s1, s2 })
}

/// Normalization factor `q` making the radiated power equal
/// [`target_radiated_power`].
///
/// Closed form of `P = Re(Iᴴ·Z·I)` with the currents above, using
/// reciprocity `Z12 = Z21`:
///
/// ```text
/// P = q²·Z0/(2π) · [ z11r·|s1|² + (z11r·g² − 2·z21r·g + z22r)/r² · |s2|²
///                    − 2·(z11r·g − z21r)/r · Re(s1*·s2) ]
/// ```
pub fn power_norm_factor(pair: &BeamspaceSymbolPair, zm: &AntennaZMatrix, cfg: &BasisConfig) -> Result<f64> {
    let (g, r) = cfg.basis_terms()?;
    let z = zm.normalized();
    let (z11r, z21r, z22r) = (z.z11.re, z.z21.re, z.z22.re);
    let cross = (pair.s1.conj() * pair.s2).re;
    let form = z11r * pair.s1.norm_sqr() + (z11r * g * g - 2.0 * z21r * g + z22r) / (r * r) * pair.s2.norm_sqr()
        - 2.0 * (z11r * g - z21r) / r * cross;
    let radicand = zm.z0() * form / (2.0 * PI);
    let target = target_radiated_power(pair, cfg);
    if !(radicand > 0.0) {
        return Err(Error::NonPositivePower(radicand));
    }
    Ok((target / radicand).sqrt())
}

/// `P_rad = (|s1|² + |s2|²) / (|s1|²max + |s2|²max) · P_rad,max`.
pub fn target_radiated_power(pair: &BeamspaceSymbolPair, cfg: &BasisConfig) -> f64 {
    pair.energy() / cfg.pair_max_energy() * cfg.prad_max
}

/// Magnitude of the matched feed voltage delivering the target power,
/// `|V_in| = √(P_rad · Z0)`.
pub fn feeding_voltage(pair: &BeamspaceSymbolPair, cfg: &BasisConfig) -> f64 {
    (target_radiated_power(pair, cfg) * cfg.z0).sqrt()
}
