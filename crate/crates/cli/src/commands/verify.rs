use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Args;
use lma_core::beamspace;
use lma_core::oracle::{self, Tolerances, VerificationReport};
use num_complex::Complex64;

use super::output_path;
use crate::config::Setup;
use crate::loads::{self, Design, LoadRow};
use crate::table::{Cell, Table};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Load table written by `synthesize` (CSV, or JSON by extension).
    pub table: PathBuf,
    /// Report file.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Allowed |Zin − Z0|, ohms.
    #[arg(long)]
    pub zin_tol: Option<f64>,
    /// Allowed relative error on currents and powers.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Allowed feed phase, radians.
    #[arg(long)]
    pub phase_tol: Option<f64>,
}

const COLUMNS: [&str; 8] = [
    "ind",
    "result",
    "zin_err_ohm",
    "current_rel_err",
    "feed_phase_rad",
    "branch_power_rel_err",
    "radiated_power_rel_err",
    "detail",
];

fn check_row(setup: &Setup, row: &LoadRow, d: &Design, tol: &Tolerances) -> lma_core::Result<VerificationReport> {
    let q = beamspace::power_norm_factor(&row.pair, &setup.zm, &setup.cfg)?;
    let targets = beamspace::currents_from_symbols(&row.pair, &setup.cfg, q)?;
    let power = beamspace::target_radiated_power(&row.pair, &setup.cfg);
    Ok(oracle::verify_loads(&d.loads1, &d.loads2, &setup.zm, Complex64::new(d.vin, 0.0), targets, power, tol))
}

pub fn run(setup: &Setup, args: &VerifyArgs) -> Result<ExitCode> {
    let table = Table::read(&args.table)?;
    let (topology, rows) =
        loads::parse(&table, setup.cfg.z0).with_context(|| format!("reading {}", args.table.display()))?;
    let base = setup.file.tolerances.unwrap_or_default();
    let tol = Tolerances {
        zin_ohm: args.zin_tol.unwrap_or(base.zin_ohm),
        rel: args.rel_tol.unwrap_or(base.rel),
        phase_rad: args.phase_tol.unwrap_or(base.phase_rad),
    };

    let mut report = Table::new(&COLUMNS);
    let (mut passed, mut skipped, mut failed) = (0, 0, Vec::new());
    for row in &rows {
        let Some(design) = &row.design else {
            skipped += 1;
            let mut cells = vec![Cell::text(&row.ind), Cell::text("skipped")];
            cells.extend(std::iter::repeat(Cell::Empty).take(5));
            cells.push(Cell::text(&row.status));
            report.push(cells);
            continue;
        };
        let (ok, residuals, detail) = match check_row(setup, row, design, &tol) {
            Ok(rep) => {
                let residual = |name| rep.check(name).map_or(Cell::Empty, |c| Cell::Num(c.residual));
                let residuals = ["zin", "currents", "feed_phase", "branch_power_sum", "radiated_power"].map(residual);
                let detail = match &rep.error {
                    Some(e) => e.clone(),
                    None => rep.failures().map(|c| c.name).collect::<Vec<_>>().join(" "),
                };
                (rep.passed(), residuals, detail)
            }
            Err(e) => (false, std::array::from_fn(|_| Cell::Empty), e.to_string()),
        };
        if ok {
            passed += 1;
        } else {
            failed.push(row.ind.clone());
        }
        let mut cells = vec![Cell::text(&row.ind), Cell::text(if ok { "pass" } else { "fail" })];
        cells.extend(residuals);
        cells.push(Cell::text(detail));
        report.push(cells);
    }

    let out = output_path(args.out.as_deref(), "verify_report", setup.format);
    report.write(&out, setup.format)?;
    println!(
        "{}: {} rows ({}), {passed} passed, {} failed, {skipped} skipped",
        out.display(),
        rows.len(),
        topology.name(),
        failed.len()
    );
    if !failed.is_empty() {
        println!("failed rows: {}", failed.join(" "));
    }
    Ok(if failed.is_empty() && passed > 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
