//! Run configuration: built-in defaults, then an optional JSON file, then
//! explicit flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use lma_core::enumeration::PairEnumeration;
use lma_core::link::{FeedModel, Receiver};
use lma_core::oracle::Tolerances;
use lma_core::{AntennaZMatrix, BasisConfig, Topology};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModeName {
    #[value(name = "CONVENTIONAL")]
    Conventional,
    #[value(name = "LMA_IDEAL")]
    LmaIdeal,
    #[value(name = "LMA_ERRED")]
    LmaErred,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    /// Relative paths are taken relative to the config file.
    pub z_matrix_path: Option<PathBuf>,
    pub b: Option<f64>,
    pub phi_deg: Option<f64>,
    pub z0_ohm: Option<f64>,
    pub prad_max_w: Option<f64>,
    pub topology: Option<Topology>,
    pub output_format: Option<OutputFormat>,
    pub enumeration: Option<PairEnumeration>,
    pub s: Option<f64>,
    pub s_sweep: Option<String>,
    pub s_select: Option<String>,
    pub rows: Option<usize>,
    pub tolerances: Option<Tolerances>,
    pub ber: BerFileConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BerFileConfig {
    pub snr_grid_db: Option<Vec<f64>>,
    pub min_bit_errors: Option<u64>,
    pub max_bits: Option<u64>,
    pub seed: Option<u64>,
    pub modes: Option<Vec<ModeName>>,
    pub receiver: Option<Receiver>,
    pub feed: Option<FeedModel>,
    pub tolerance: Option<f64>,
    pub quant_step: Option<f64>,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration; explicit flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Z-matrix JSON file (defaults to the built-in two-dipole fixture).
    #[arg(long, global = true)]
    pub z_matrix: Option<PathBuf>,
    /// Bessel argument of the basis, in (0, 2.4048).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Common phase shift of both streams, degrees.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub phi_deg: Option<f64>,
    /// Source reference impedance, ohms.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub z0: Option<f64>,
    /// Radiated power of the highest-energy pair, watts.
    #[arg(long, global = true)]
    pub prad_max: Option<f64>,
    /// Modulator topology: T_WITH_TL or PI_NO_TL.
    #[arg(long, global = true, value_parser = parse_topology)]
    pub topology: Option<Topology>,
    /// Output format.
    #[arg(long, global = true, value_enum, ignore_case = true)]
    pub format: Option<OutputFormat>,
    /// Calibration report whose enumeration and b are used.
    #[arg(long, global = true)]
    pub calibration: Option<PathBuf>,
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    s.parse().map_err(|e: lma_core::Error| e.to_string())
}

/// Parses an upper-case serde enum name, case-insensitively.
pub fn parse_named<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_uppercase()))
        .map_err(|_| format!("unrecognized value `{s}`"))
}

/// Everything the commands need once the layers are merged.
#[derive(Debug, Clone)]
pub struct Setup {
    pub zm: AntennaZMatrix,
    pub cfg: BasisConfig,
    pub topology: Topology,
    pub format: OutputFormat,
    pub enumeration: PairEnumeration,
    pub file: FileConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReIm {
    re: f64,
    im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZMatrixFile {
    z0_ohm: Option<f64>,
    z: [[ReIm; 2]; 2],
}

#[derive(Deserialize)]
struct CalibrationFile {
    enumeration: PairEnumeration,
    b: f64,
}

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {what} {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} {}", path.display()))
}

impl Setup {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let (file, base_dir) = match &args.config {
            Some(p) => {
                let file: FileConfig = read_json(p, "config")?;
                (file, p.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        let z_path = args.z_matrix.clone().or_else(|| file.z_matrix_path.as_ref().map(|p| base_dir.join(p)));

        let (entries, file_z0) = match &z_path {
            Some(p) => {
                let zf: ZMatrixFile = read_json(p, "Z-matrix")?;
                let c = |e: &ReIm| Complex64::new(e.re, e.im);
                ([c(&zf.z[0][0]), c(&zf.z[0][1]), c(&zf.z[1][0]), c(&zf.z[1][1])], zf.z0_ohm)
            }
            None => {
                let f = AntennaZMatrix::reference_fixture();
                ([f.z11(), f.z12(), f.z21(), f.z22()], Some(f.z0()))
            }
        };
        let z0 = args.z0.or(file.z0_ohm).or(file_z0).unwrap_or(50.0);
        let zm = AntennaZMatrix::new(entries[0], entries[1], entries[2], entries[3], z0)?;

        let calibration: Option<CalibrationFile> =
            args.calibration.as_ref().map(|p| read_json(p, "calibration report")).transpose()?;

        let defaults = BasisConfig::default();
        let cfg = BasisConfig {
            b: args.b.or(calibration.as_ref().map(|c| c.b)).or(file.b).unwrap_or(defaults.b),
            phase_shift: args.phi_deg.or(file.phi_deg).map_or(defaults.phase_shift, f64::to_radians),
            z0,
            prad_max: args.prad_max.or(file.prad_max_w).unwrap_or(defaults.prad_max),
            constellation: defaults.constellation,
        };
        cfg.validate()?;

        Ok(Self {
            zm,
            cfg,
            topology: args.topology.or(file.topology).unwrap_or(Topology::TWithTl),
            format: args.format.or(file.output_format).unwrap_or(OutputFormat::Csv),
            enumeration: calibration.map(|c| c.enumeration).or(file.enumeration).unwrap_or_default(),
            file,
        })
    }
}

/// A comma-separated list, or an inclusive range `a:b:c`.
///
/// Ranges are written both as `start:stop:step` (`-1:1:0.5`) and as
/// `start:step:stop` (`0:2:20`); whichever reading yields more points wins,
/// ties going to `start:stop:step`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number `{p}` in `{spec}`")))
            .collect::<Result<_>>()?;
        let [a, b, c] = parts[..] else {
            bail!("range `{spec}` must have three fields");
        };
        ensure!(parts.iter().all(|x| x.is_finite()), "range `{spec}` must be finite");
        let count = |lo: f64, hi: f64, step: f64| {
            (step > 0.0 && lo <= hi).then(|| ((hi - lo) / step + 1e-9).floor() as usize + 1)
        };
        let (lo, step, n) = match (count(a, b, c), count(a, c, b)) {
            (Some(n1), Some(n2)) if n2 > n1 => (a, b, n2),
            (Some(n1), _) => (a, c, n1),
            (None, Some(n2)) => (a, b, n2),
            (None, None) => bail!("range `{spec}` needs an increasing start, stop and a positive step"),
        };
        ensure!(n <= 1_000_000, "range `{spec}` has too many points");
        // multiply rather than accumulate so 0:0.1:1 hits its end points exactly
        Ok((0..n).map(|k| lo + k as f64 * step).collect())
    } else {
        let values: Vec<f64> = spec
            .split(',')
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number `{p}` in `{spec}`")))
            .collect::<Result<_>>()?;
        ensure!(values.iter().all(|v| !v.is_nan()), "grid `{spec}` contains NaN");
        Ok(values)
    }
}
