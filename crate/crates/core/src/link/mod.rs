//! Monte Carlo bit-error-rate comparison of the load-modulated transmitter
//! against a conventional two-antenna transmitter.
//!
//! Both send two Gray-mapped QAM streams per channel use over an i.i.d.
//! Rayleigh 2×2 channel, redrawn every use. The conventional transmitter puts
//! stream `n` on antenna `n`; the load-modulated one radiates the beamspace
//! symbols its (possibly erred) loads actually produce. The receiver knows the
//! channel and the nominal alphabet.
//!
//! Transmit vectors are scaled to unit mean energy per stream. `Eb/N0` is the
//! total transmit energy per information bit over the per-antenna noise
//! density: `N0 = 2 / (2·bits_per_symbol·Eb/N0)`.
//!
//! Randomness comes from ChaCha20 seeded with the 64-bit run seed. Grid point
//! `k` draws data, channel and noise from stream `2k` and load errors from
//! stream `2k + 1`, so points are reproducible independently and in parallel.

pub mod detect;
pub mod load_error;
pub mod transmitter;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use detect::{Detector, Receiver};
pub use load_error::LoadErrorModel;
pub use transmitter::{effective_symbols, FeedModel, LmaSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TransmitterMode {
    Conventional,
    LmaIdeal,
    LmaErred { model: LoadErrorModel },
}

impl TransmitterMode {
    pub fn label(&self) -> &'static str {
        match self {
            TransmitterMode::Conventional => "conventional",
            TransmitterMode::LmaIdeal => "lma_ideal",
            TransmitterMode::LmaErred { .. } => "lma_erred",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerConfig {
    /// `Eb/N0` points in dB; `f64::INFINITY` means noiseless.
    pub snr_grid_db: Vec<f64>,
    pub min_bit_errors: u64,
    pub max_bits: u64,
    pub seed: u64,
    pub transmitter: TransmitterMode,
    pub receiver: Receiver,
}

impl BerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("empty SNR grid".into()));
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan()) {
            return Err(Error::Config("SNR grid contains NaN".into()));
        }
        if self.min_bit_errors == 0 || self.max_bits == 0 {
            return Err(Error::Config("bit budgets must be positive".into()));
        }
        if let TransmitterMode::LmaErred { model } = &self.transmitter {
            model.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub bits_simulated: u64,
    pub bit_errors: u64,
}

impl BerPoint {
    /// Binomial standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        if self.bits_simulated == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.bits_simulated as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub transmitter: TransmitterMode,
    pub receiver: Receiver,
    pub points: Vec<BerPoint>,
}

/// `|p_a − p_b| ≤ k·√(σa² + σb²)`.
pub fn within_sigma(a: &BerPoint, b: &BerPoint, k: f64) -> bool {
    (a.ber - b.ber).abs() <= k * a.std_error().hypot(b.std_error())
}

/// `p_a ≥ p_b − k·√(σa² + σb²)`: `a` is no better than `b` within the bound.
pub fn not_below(a: &BerPoint, b: &BerPoint, k: f64) -> bool {
    a.ber >= b.ber - k * a.std_error().hypot(b.std_error())
}

/// Whether `curve` is non-increasing in SNR up to `k` combined standard errors.
pub fn is_monotone(curve: &BerCurve, k: f64) -> bool {
    curve.points.windows(2).all(|w| w[1].ber <= w[0].ber + k * w[0].std_error().hypot(w[1].std_error()))
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

fn noise_variance(snr_db: f64, bits_per_use: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    let ebn0 = 10f64.powf(snr_db / 10.0);
    2.0 / (bits_per_use * ebn0)
}

fn point_rngs(seed: u64, index: usize) -> (ChaCha20Rng, ChaCha20Rng) {
    let mut data = ChaCha20Rng::seed_from_u64(seed);
    data.set_stream(2 * index as u64);
    let mut loads = ChaCha20Rng::seed_from_u64(seed);
    loads.set_stream(2 * index as u64 + 1);
    (data, loads)
}

/// Transmit vector (unit mean energy per stream) for a pair of labels.
fn transmit<R: Rng + ?Sized>(
    mode: &TransmitterMode,
    system: &LmaSystem,
    labels: (u32, u32),
    scale: f64,
    load_rng: &mut R,
) -> Result<[Complex64; 2]> {
    let (l1, l2) = labels;
    let s = match mode {
        TransmitterMode::Conventional => system.entry(l1, l2).pair,
        TransmitterMode::LmaIdeal => system.entry(l1, l2).ideal,
        TransmitterMode::LmaErred { model } => {
            let e = system.entry(l1, l2);
            let loads1 = model.apply(&e.loads1, load_rng);
            let loads2 = model.apply(&e.loads2, load_rng);
            system.radiate(l1, l2, &loads1, &loads2)?
        }
    };
    Ok([s.s1 * scale, s.s2 * scale])
}

fn run_point(config: &BerConfig, system: &LmaSystem, index: usize) -> Result<BerPoint> {
    let snr_db = config.snr_grid_db[index];
    let constellation = &system.cfg.constellation;
    let order = constellation.order() as u32;
    let bits_per_use = 2 * constellation.bits_per_symbol() as u64;
    let scale = 1.0 / constellation.mean_energy().sqrt();
    let n0 = noise_variance(snr_db, bits_per_use as f64);
    let detector = Detector::new(constellation.clone(), scale);
    let (mut rng, mut load_rng) = point_rngs(config.seed, index);

    let mut bits = 0u64;
    let mut errors = 0u64;
    while errors < config.min_bit_errors && bits < config.max_bits {
        let labels = (rng.gen_range(0..order), rng.gen_range(0..order));
        let x = transmit(&config.transmitter, system, labels, scale, &mut load_rng)?;
        let h = [
            [complex_normal(&mut rng, 1.0), complex_normal(&mut rng, 1.0)],
            [complex_normal(&mut rng, 1.0), complex_normal(&mut rng, 1.0)],
        ];
        let n = [complex_normal(&mut rng, 1.0), complex_normal(&mut rng, 1.0)];
        let noise_amp = n0.sqrt();
        let y = [
            h[0][0] * x[0] + h[0][1] * x[1] + n[0] * noise_amp,
            h[1][0] * x[0] + h[1][1] * x[1] + n[1] * noise_amp,
        ];
        let (d1, d2) = detector.detect(config.receiver, &h, y);
        errors += ((d1 ^ labels.0).count_ones() + (d2 ^ labels.1).count_ones()) as u64;
        bits += bits_per_use;
    }
    Ok(BerPoint { snr_db, ber: errors as f64 / bits as f64, bits_simulated: bits, bit_errors: errors })
}

/// Runs every grid point; points are independent and evaluated in parallel.
pub fn run_ber(config: &BerConfig, system: &LmaSystem) -> Result<BerCurve> {
    config.validate()?;
    let points = (0..config.snr_grid_db.len())
        .into_par_iter()
        .map(|k| run_point(config, system, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(BerCurve { transmitter: config.transmitter, receiver: config.receiver, points })
}

/// Mean transmit energy per channel use over `uses` random label pairs.
pub fn mean_transmit_energy(mode: &TransmitterMode, system: &LmaSystem, uses: usize, seed: u64) -> Result<f64> {
    let constellation = &system.cfg.constellation;
    let order = constellation.order() as u32;
    let scale = 1.0 / constellation.mean_energy().sqrt();
    let (mut rng, mut load_rng) = point_rngs(seed, 0);
    let mut total = 0.0;
    for _ in 0..uses {
        let labels = (rng.gen_range(0..order), rng.gen_range(0..order));
        let x = transmit(mode, system, labels, scale, &mut load_rng)?;
        total += x[0].norm_sqr() + x[1].norm_sqr();
    }
    Ok(total / uses as f64)
}
