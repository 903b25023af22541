use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Result};
use clap::Args;
use lma_core::synthesis;

use super::{output_path, with_suffix};
use crate::config::{parse_grid, Setup};
use crate::loads;
use crate::table::Table;

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Only the first N pairs of the enumeration.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Free parameter applied to every row.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["s_sweep", "s_select"])]
    pub s: Option<f64>,
    /// One table per value of `start:stop:step` or a comma list.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "s_select")]
    pub s_sweep: Option<String>,
    /// Per row, the value from this grid giving the smallest peak reactance.
    #[arg(long, allow_hyphen_values = true)]
    pub s_select: Option<String>,
    /// Output file (a suffix `_s<value>` is added per sweep value).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

enum FreeParameter {
    Fixed(f64),
    Sweep(Vec<f64>),
    Select(Vec<f64>),
}

fn free_parameter(setup: &Setup, args: &SynthesizeArgs) -> Result<FreeParameter> {
    let file = &setup.file;
    let choice = if let Some(s) = args.s {
        FreeParameter::Fixed(s)
    } else if let Some(spec) = &args.s_sweep {
        FreeParameter::Sweep(parse_grid(spec)?)
    } else if let Some(spec) = &args.s_select {
        FreeParameter::Select(parse_grid(spec)?)
    } else if let Some(spec) = &file.s_sweep {
        FreeParameter::Sweep(parse_grid(spec)?)
    } else if let Some(spec) = &file.s_select {
        FreeParameter::Select(parse_grid(spec)?)
    } else {
        FreeParameter::Fixed(file.s.unwrap_or(0.0))
    };
    match &choice {
        FreeParameter::Fixed(s) => ensure!(s.is_finite(), "free parameter must be finite"),
        FreeParameter::Sweep(g) | FreeParameter::Select(g) => {
            ensure!(!g.is_empty() && g.iter().all(|s| s.is_finite()), "free-parameter grid must be finite")
        }
    }
    Ok(choice)
}

/// Builds one table; returns it with the number of synthesized rows.
fn build(setup: &Setup, rows: usize, s_fixed: Option<f64>, s_grid: &[f64]) -> (Table, usize) {
    let mut table = Table::new(&loads::headers(setup.topology));
    let mut ok = 0;
    for (k, pair) in setup.enumeration.pairs(&setup.cfg.constellation).iter().take(rows).enumerate() {
        let outcome = match s_fixed {
            Some(s) => synthesis::synthesize(pair, &setup.zm, &setup.cfg, setup.topology, s),
            None => synthesis::synthesize_min_load(pair, &setup.zm, &setup.cfg, setup.topology, s_grid),
        };
        match &outcome {
            Ok(_) => ok += 1,
            Err(e) => eprintln!("warning: row {}: {e}", k + 1),
        }
        table.push(loads::row(k + 1, pair, s_fixed, &outcome, setup.cfg.z0));
    }
    (table, ok)
}

pub fn run(setup: &Setup, args: &SynthesizeArgs) -> Result<ExitCode> {
    let total = setup.cfg.constellation.order().pow(2);
    let rows = args.rows.or(setup.file.rows).unwrap_or(total).min(total);
    ensure!(rows > 0, "--rows must be positive");
    let out = output_path(args.out.as_deref(), "load_table", setup.format);

    let jobs: Vec<(PathBuf, Option<f64>, Vec<f64>)> = match free_parameter(setup, args)? {
        FreeParameter::Fixed(s) => vec![(out, Some(s), Vec::new())],
        FreeParameter::Sweep(grid) => {
            grid.into_iter().map(|s| (with_suffix(&out, &format!("_s{s}")), Some(s), Vec::new())).collect()
        }
        FreeParameter::Select(grid) => vec![(out, None, grid)],
    };
    let mut any_ok = false;
    for (path, s, grid) in jobs {
        let (table, ok) = build(setup, rows, s, &grid);
        table.write(&path, setup.format)?;
        println!("{}: {ok}/{rows} rows synthesized ({})", path.display(), setup.topology.name());
        any_ok |= ok > 0;
    }
    Ok(if any_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
