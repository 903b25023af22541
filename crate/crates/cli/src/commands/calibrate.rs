use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Context, Result};
use clap::Args;
use lma_core::beamspace::J0_FIRST_ZERO;
use lma_core::calibration::{self, CalibrationOptions, CalibrationReport, REFERENCE_TABLE};
use serde::Serialize;

use crate::config::{parse_grid, Setup};

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Values of b to try, `start:stop:step` or a comma list.
    #[arg(long)]
    pub b_grid: Option<String>,
    /// Skip the local refinement of b around the best grid point.
    #[arg(long)]
    pub no_refine: bool,
    /// Report file (always JSON; usable as `--calibration` afterwards).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Output<'a> {
    #[serde(flatten)]
    report: &'a CalibrationReport,
    ordering: String,
    unique: bool,
    /// Whether b = π/4 reproduces the table as well as the tolerance requires.
    quarter_pi_within_tolerance: bool,
    match_tol: f64,
}

pub fn run(setup: &Setup, args: &CalibrateArgs) -> Result<ExitCode> {
    let mut options = CalibrationOptions::default();
    if let Some(spec) = &args.b_grid {
        let grid = parse_grid(spec)?;
        ensure!(
            grid.iter().all(|b| *b > 0.0 && *b < J0_FIRST_ZERO),
            "b grid values must lie in (0, {J0_FIRST_ZERO})"
        );
        options.b_grid = grid;
    }
    options.refine = !args.no_refine;

    let report = calibration::calibrate(&setup.zm, &setup.cfg, &REFERENCE_TABLE, &options);
    let out = Output {
        report: &report,
        ordering: report.enumeration.describe(&setup.cfg.constellation),
        unique: report.unique(),
        quarter_pi_within_tolerance: report.residual_at_quarter_pi <= options.match_tol,
        match_tol: options.match_tol,
    };
    let path = args.out.clone().unwrap_or_else(|| PathBuf::from("calibration.json"));
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;

    println!("ordering: {}", out.ordering);
    println!("b = {:.9} ({:.6} pi)", report.b, report.b / PI);
    println!(
        "max deviation: Vin {:.3e} V, currents {:.3e} A, powers {:.3e} W, phi {:.3e} deg",
        report.residual.vin, report.residual.currents, report.residual.powers, report.residual.phi_deg
    );
    println!(
        "orderings matching feed voltages: {}, matching full rows: {}",
        report.vin_consistent,
        report.full_matches.len()
    );
    println!(
        "b = pi/4 residual {:.3e} ({} tolerance {:.0e})",
        report.residual_at_quarter_pi,
        if out.quarter_pi_within_tolerance { "within" } else { "outside" },
        options.match_tol
    );
    if let Some(w) = &report.warning {
        eprintln!("warning: {w}");
    }
    println!("report written to {}", path.display());
    Ok(ExitCode::SUCCESS)
}
