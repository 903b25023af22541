//! `lma`: synthesize, verify and calibrate load tables for a two-element
//! load-modulated array, and run BER comparisons.
//!
//! Exit status: 0 on success, 1 when verification fails, 2 on usage, input or
//! configuration errors.

mod commands;
mod config;
mod loads;
mod table;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ber::BerArgs, calibrate::CalibrateArgs, synthesize::SynthesizeArgs, verify::VerifyArgs};
use config::{CommonArgs, Setup};

#[derive(Debug, Parser)]
#[command(name = "lma", version, about = "Load-table synthesis and verification for single-RF load-modulated arrays")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the modulator loads for every symbol pair.
    Synthesize(SynthesizeArgs),
    /// Check a load table against an independent circuit solve.
    Verify(VerifyArgs),
    /// Fit the pair ordering and b to the reference design table.
    Calibrate(CalibrateArgs),
    /// Monte Carlo BER of the load-modulated and conventional transmitters.
    Ber(BerArgs),
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let setup = Setup::resolve(&cli.common)?;
    match &cli.command {
        Command::Synthesize(args) => commands::synthesize::run(&setup, args),
        Command::Verify(args) => commands::verify::run(&setup, args),
        Command::Calibrate(args) => commands::calibrate::run(&setup, args),
        Command::Ber(args) => commands::ber::run(&setup, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
