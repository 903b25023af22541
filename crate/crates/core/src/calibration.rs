//! Fitting the free basis argument `b` and the table ordering to the
//! reference design table of the default antenna fixture.
//!
//! The table lists the first 16 designs (feed voltage, port currents, phase
//! shift, branch powers) rounded to three decimals. The feed voltage depends
//! only on `|s1|² + |s2|²`, so it screens orderings independently of `b`; the
//! currents and powers then pin `b`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antenna::AntennaZMatrix;
use crate::beamspace::{self, BasisConfig};
use crate::enumeration::PairEnumeration;
use crate::synthesis::{self, wrap_angle};
use crate::twoport::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub vin: f64,
    pub i1: Complex64,
    pub i2: Complex64,
    pub phi_deg: f64,
    pub p1: f64,
    pub p2: f64,
}

const fn row(vin: f64, i1: (f64, f64), i2: (f64, f64), p1: f64, p2: f64) -> ReferenceRow {
    ReferenceRow {
        vin,
        i1: Complex64::new(i1.0, i1.1),
        i2: Complex64::new(i2.0, i2.1),
        phi_deg: -10.0,
        p1,
        p2,
    }
}

/// Reference T-with-line designs for the default fixture, 16-QAM, −10°.
pub const REFERENCE_TABLE: [ReferenceRow; 16] = [
    row(6.236, (0.060, -0.043), (-0.079, 0.113), 0.173, 0.605),
    row(5.27, (0.072, 0.012), (-0.095, 0.051), 0.28, 0.275),
    row(5.27, (0.073, 0.061), (-0.094, -0.014), 0.421, 0.135),
    row(6.236, (0.071, 0.098), (-0.091, -0.064), 0.569, 0.209),
    row(5.27, (0.006, -0.039), (-0.018, 0.118), -0.015, 0.571),
    row(4.082, (0.022, 0.032), (-0.040, 0.057), 0.166, 0.167),
    row(4.082, (0.026, 0.082), (-0.041, -0.029), 0.36, -0.026),
    row(5.27, (0.028, 0.107), (-0.040, -0.074), 0.461, 0.095),
    row(5.27, (-0.055, -0.026), (0.054, 0.100), -0.053, 0.609),
    row(4.082, (-0.053, 0.041), (0.050, 0.035), 0.068, 0.266),
    row(4.082, (-0.031, 0.086), (0.027, -0.038), 0.276, 0.058),
    row(5.27, (-0.017, 0.111), (0.012, -0.081), 0.416, 0.14),
    row(6.236, (-0.096, -0.013), (0.104, 0.073), 0.063, 0.715),
    row(5.27, (-0.088, 0.038), (0.094, 0.014), 0.135, 0.421),
    row(5.27, (-0.072, 0.080), (0.076, -0.041), 0.276, 0.279),
    row(6.236, (-0.058, 0.114), (0.061, -0.086), 0.452, 0.326),
];

/// One computed table row, in the same units as [`ReferenceRow`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComputedRow {
    pub vin: f64,
    pub i1: Complex64,
    pub i2: Complex64,
    /// `∠I2 − ∠s2`, degrees.
    pub phi_deg: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Largest absolute deviation per column group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableResidual {
    pub vin: f64,
    pub currents: f64,
    pub powers: f64,
    pub phi_deg: f64,
}

impl TableResidual {
    /// Worst deviation over voltage, current and power columns.
    pub fn overall(&self) -> f64 {
        self.vin.max(self.currents).max(self.powers)
    }

    fn infinite() -> Self {
        Self { vin: f64::INFINITY, currents: f64::INFINITY, powers: f64::INFINITY, phi_deg: f64::INFINITY }
    }
}

/// Synthesizes the first `n` rows of `enumeration`; `None` marks a pair that
/// could not be synthesized.
pub fn computed_rows(
    enumeration: &PairEnumeration,
    zm: &AntennaZMatrix,
    cfg: &BasisConfig,
    n: usize,
) -> Vec<Option<ComputedRow>> {
    enumeration
        .pairs(&cfg.constellation)
        .iter()
        .take(n)
        .map(|pair| {
            let r = synthesis::synthesize(pair, zm, cfg, Topology::TWithTl, 0.0).ok()?;
            Some(ComputedRow {
                vin: r.vin.norm(),
                i1: r.i1,
                i2: r.i2,
                phi_deg: wrap_angle(r.i2.arg() - pair.s2.arg()).to_degrees(),
                p1: r.power.p1,
                p2: r.power.p2,
            })
        })
        .collect()
}

pub fn table_residual(rows: &[Option<ComputedRow>], reference: &[ReferenceRow]) -> TableResidual {
    let mut res = TableResidual { vin: 0.0, currents: 0.0, powers: 0.0, phi_deg: 0.0 };
    if rows.len() < reference.len() {
        return TableResidual::infinite();
    }
    for (got, want) in rows.iter().zip(reference) {
        let Some(got) = got else {
            return TableResidual::infinite();
        };
        res.vin = res.vin.max((got.vin - want.vin).abs());
        for d in [got.i1 - want.i1, got.i2 - want.i2] {
            res.currents = res.currents.max(d.re.abs()).max(d.im.abs());
        }
        res.powers = res.powers.max((got.p1 - want.p1).abs()).max((got.p2 - want.p2).abs());
        res.phi_deg = res.phi_deg.max((got.phi_deg - want.phi_deg).abs());
    }
    res
}

fn vin_residual(enumeration: &PairEnumeration, cfg: &BasisConfig, reference: &[ReferenceRow]) -> f64 {
    enumeration
        .pairs(&cfg.constellation)
        .iter()
        .zip(reference)
        .map(|(p, want)| (beamspace::feeding_voltage(p, cfg) - want.vin).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub b_grid: Vec<f64>,
    /// Golden-section refinement of `b` around the best grid point.
    pub refine: bool,
    /// Feed-voltage screening tolerance, volts.
    pub vin_tol: f64,
    /// Residual below which a candidate counts as reproducing the table.
    pub match_tol: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        let mut b_grid: Vec<f64> = (0..=70).map(|k| 0.60 + 0.005 * k as f64).collect();
        b_grid.push(PI / 4.0);
        b_grid.sort_by(f64::total_cmp);
        Self { b_grid, refine: true, vin_tol: 5e-4, match_tol: 2e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFit {
    pub enumeration: PairEnumeration,
    pub b: f64,
    pub residual: TableResidual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub enumeration: PairEnumeration,
    pub b: f64,
    pub residual: TableResidual,
    /// Residual of the chosen enumeration at each grid value of `b`.
    pub b_sweep: Vec<(f64, f64)>,
    /// Residual of the chosen enumeration at `b = π/4`.
    pub residual_at_quarter_pi: f64,
    /// Orderings whose feed voltages reproduce the table.
    pub vin_consistent: usize,
    /// Orderings that reproduce the full table within `match_tol`.
    pub full_matches: Vec<CandidateFit>,
    pub vin_only: bool,
    pub warning: Option<String>,
}

impl CalibrationReport {
    pub fn unique(&self) -> bool {
        self.full_matches.len() == 1
    }
}

fn golden_section(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Searches orderings and `b` for the best reproduction of `reference`.
///
/// For an antenna other than the default fixture the current and power
/// columns do not apply; only feed voltages are matched and `b` is left at
/// the base configuration's value.
pub fn calibrate(
    zm: &AntennaZMatrix,
    base: &BasisConfig,
    reference: &[ReferenceRow],
    options: &CalibrationOptions,
) -> CalibrationReport {
    let n = reference.len();
    let fit = |e: &PairEnumeration, b: f64| {
        let cfg = BasisConfig { b, ..base.clone() };
        table_residual(&computed_rows(e, zm, &cfg, n), reference)
    };

    let mut screened: Vec<PairEnumeration> = PairEnumeration::candidates(&base.constellation)
        .into_iter()
        .filter(|e| vin_residual(e, base, reference) <= options.vin_tol)
        .collect();
    // keep the default ordering first so ties resolve towards it
    if let Some(pos) = screened.iter().position(|e| *e == PairEnumeration::default()) {
        screened.swap(0, pos);
    }
    let vin_consistent = screened.len();

    let vin_only = *zm != AntennaZMatrix::reference_fixture();
    if vin_only || screened.is_empty() {
        let enumeration = screened.first().copied().unwrap_or_default();
        let residual = fit(&enumeration, base.b);
        let warning = if screened.is_empty() {
            "no ordering reproduces the reference feed voltages".to_string()
        } else {
            "antenna differs from the reference fixture; only feed voltages were matched".to_string()
        };
        return CalibrationReport {
            enumeration,
            b: base.b,
            residual,
            b_sweep: Vec::new(),
            residual_at_quarter_pi: fit(&enumeration, PI / 4.0).overall(),
            vin_consistent,
            full_matches: Vec::new(),
            vin_only: true,
            warning: Some(warning),
        };
    }

    let mut fits: Vec<CandidateFit> = screened
        .iter()
        .map(|e| {
            let (b, residual) = options
                .b_grid
                .iter()
                .map(|&b| (b, fit(e, b)))
                .min_by(|x, y| x.1.overall().total_cmp(&y.1.overall()))
                .expect("non-empty b grid");
            CandidateFit { enumeration: *e, b, residual }
        })
        .collect();
    fits.sort_by(|x, y| x.residual.overall().total_cmp(&y.residual.overall()));
    let mut best = fits[0].clone();

    if options.refine && options.b_grid.len() > 1 {
        let step = options
            .b_grid
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let lo = (best.b - step).max(1e-6);
        let hi = (best.b + step).min(beamspace::J0_FIRST_ZERO - 1e-6);
        let b = golden_section(lo, hi, |b| fit(&best.enumeration, b).overall());
        let residual = fit(&best.enumeration, b);
        if residual.overall() <= best.residual.overall() {
            best.b = b;
            best.residual = residual;
        }
    }

    let b_sweep = options.b_grid.iter().map(|&b| (b, fit(&best.enumeration, b).overall())).collect();
    let full_matches = fits.into_iter().filter(|f| f.residual.overall() <= options.match_tol).collect();
    CalibrationReport {
        enumeration: best.enumeration,
        b: best.b,
        residual: best.residual,
        b_sweep,
        residual_at_quarter_pi: fit(&best.enumeration, PI / 4.0).overall(),
        vin_consistent,
        full_matches,
        vin_only: false,
        warning: None,
    }
}
