use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Context, Result};
use clap::Args;
use lma_core::link::{self, BerConfig, BerCurve, BerPoint, FeedModel, LmaSystem, LoadErrorModel, Receiver, TransmitterMode};

use crate::config::{parse_grid, parse_named, ModeName, Setup};
use crate::table::{Cell, Table};

/// Width of the reported confidence intervals, in binomial standard errors.
const SIGMAS: f64 = 3.0;

#[derive(Debug, Args)]
pub struct BerArgs {
    /// Eb/N0 points in dB, `start:stop:step` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_grid: Option<String>,
    /// Stop a point once this many bit errors are counted.
    #[arg(long)]
    pub min_errors: Option<u64>,
    /// Stop a point after this many bits regardless.
    #[arg(long)]
    pub max_bits: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Transmitter modes to run (repeatable or comma separated).
    #[arg(long = "mode", value_enum, value_delimiter = ',', ignore_case = true)]
    pub modes: Vec<ModeName>,
    /// ML or ZF.
    #[arg(long, value_parser = parse_named::<Receiver>)]
    pub receiver: Option<Receiver>,
    /// MATCHED_SOURCE or IDEAL_VOLTAGE.
    #[arg(long, value_parser = parse_named::<FeedModel>)]
    pub feed: Option<FeedModel>,
    /// Relative uniform error on every reactance for LMA_ERRED.
    #[arg(long, conflicts_with = "quant_step")]
    pub tolerance: Option<f64>,
    /// Quantize reactances to this normalized step for LMA_ERRED.
    #[arg(long)]
    pub quant_step: Option<f64>,
    /// Free parameter used for the load tables.
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Directory receiving one file per mode and the summary.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn interval(p: &BerPoint) -> (f64, f64) {
    let half = SIGMAS * p.std_error();
    ((p.ber - half).max(0.0), (p.ber + half).min(1.0))
}

fn curve_table(curve: &BerCurve) -> Table {
    let mut t = Table::new(&["snr_db", "ber", "bits", "errors"]);
    for p in &curve.points {
        t.push(vec![Cell::Num(p.snr_db), Cell::Num(p.ber), Cell::Int(p.bits_simulated as i64), Cell::Int(p.bit_errors as i64)]);
    }
    t
}

pub fn run(setup: &Setup, args: &BerArgs) -> Result<ExitCode> {
    let file = &setup.file.ber;
    let snr_grid_db = match (&args.snr_grid, &file.snr_grid_db) {
        (Some(spec), _) => parse_grid(spec)?,
        (None, Some(grid)) => grid.clone(),
        (None, None) => parse_grid("0:2:20")?,
    };
    let mut modes = if args.modes.is_empty() {
        file.modes.clone().unwrap_or_else(|| vec![ModeName::Conventional, ModeName::LmaIdeal])
    } else {
        args.modes.clone()
    };
    modes.dedup();
    ensure!(!modes.is_empty(), "no transmitter mode selected");
    // erred curves are always reported against the ideal one
    if modes.contains(&ModeName::LmaErred) && !modes.contains(&ModeName::LmaIdeal) {
        modes.push(ModeName::LmaIdeal);
    }

    let quant_step = args.quant_step.or(if args.tolerance.is_some() { None } else { file.quant_step });
    let error_model = match quant_step {
        Some(step) => LoadErrorModel::Quantized { step },
        None => LoadErrorModel::Multiplicative { tolerance: args.tolerance.or(file.tolerance).unwrap_or(0.01) },
    };
    error_model.validate()?;

    let system = LmaSystem::new(
        setup.zm,
        setup.cfg.clone(),
        setup.topology,
        args.s.or(setup.file.s).unwrap_or(0.0),
        args.feed.or(file.feed).unwrap_or(FeedModel::MatchedSource),
    )?;
    let receiver = args.receiver.or(file.receiver).unwrap_or(Receiver::Ml);
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;

    let mut curves = Vec::new();
    for mode in &modes {
        let transmitter = match mode {
            ModeName::Conventional => TransmitterMode::Conventional,
            ModeName::LmaIdeal => TransmitterMode::LmaIdeal,
            ModeName::LmaErred => TransmitterMode::LmaErred { model: error_model },
        };
        let config = BerConfig {
            snr_grid_db: snr_grid_db.clone(),
            min_bit_errors: args.min_errors.or(file.min_bit_errors).unwrap_or(200),
            max_bits: args.max_bits.or(file.max_bits).unwrap_or(100_000_000),
            seed: args.seed.or(file.seed).unwrap_or(42),
            transmitter,
            receiver,
        };
        config.validate()?;
        let curve = link::run_ber(&config, &system)?;
        let path = args.out_dir.join(format!("ber_{}.{}", transmitter.label(), setup.format.extension()));
        curve_table(&curve).write(&path, setup.format)?;
        println!("{}: {} points", path.display(), curve.points.len());
        curves.push((*mode, curve));
    }

    let find = |m: ModeName| curves.iter().find(|(n, _)| *n == m).map(|(_, c)| c);
    let mut comparisons: Vec<(&str, &BerCurve, &BerCurve, fn(&BerPoint, &BerPoint, f64) -> bool, &str)> = Vec::new();
    if let (Some(lma), Some(conv)) = (find(ModeName::LmaIdeal), find(ModeName::Conventional)) {
        comparisons.push(("lma_ideal vs conventional", lma, conv, link::within_sigma, "within CI"));
    }
    if let (Some(erred), Some(ideal)) = (find(ModeName::LmaErred), find(ModeName::LmaIdeal)) {
        comparisons.push(("lma_erred vs lma_ideal", erred, ideal, link::not_below, "not below"));
    }
    if comparisons.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }

    let mut summary = Table::new(&[
        "comparison", "snr_db", "ber", "ci_low", "ci_high", "ber_ref", "ci_low_ref", "ci_high_ref", "holds",
    ]);
    for (name, curve, reference, relation, label) in comparisons {
        let mut misses = Vec::new();
        for (p, r) in curve.points.iter().zip(&reference.points) {
            let holds = relation(p, r, SIGMAS);
            if !holds {
                misses.push(format!("{}", p.snr_db));
            }
            let ((lo, hi), (rlo, rhi)) = (interval(p), interval(r));
            summary.push(vec![
                Cell::text(name),
                Cell::Num(p.snr_db),
                Cell::Num(p.ber),
                Cell::Num(lo),
                Cell::Num(hi),
                Cell::Num(r.ber),
                Cell::Num(rlo),
                Cell::Num(rhi),
                Cell::Bool(holds),
            ]);
        }
        if misses.is_empty() {
            println!("{name}: {label} at all {} points ({SIGMAS} sigma)", curve.points.len());
        } else {
            println!("{name}: not {label} at {} dB ({SIGMAS} sigma)", misses.join(", "));
        }
    }
    let path = args.out_dir.join(format!("ber_summary.{}", setup.format.extension()));
    summary.write(&path, setup.format)?;
    Ok(ExitCode::SUCCESS)
}
