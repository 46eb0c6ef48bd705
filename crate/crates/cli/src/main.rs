//! `blinking`: correlation curves, scans, oracles, simulations and fits for
//! blinking emitters. Curves are written as CSV with `# key = value`
//! metadata lines. Exit status is 2 for invalid input and 1 for numerical
//! failures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod fit_cmd;
mod reproduce;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "blinking", version, about = "Photon correlations of blinking emitters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// g(τ) of two dipole-coupled V systems.
    Gtau(commands::GtauArgs),
    /// g(0) of two V systems over an Ω₃ grid for several Re C₃.
    GzeroScan(commands::GzeroScanArgs),
    /// Dipole coupling constant against separation.
    Coupling(commands::CouplingCmdArgs),
    /// Switching rates, mean durations and occupation probabilities.
    Rates(commands::RatesArgs),
    /// Master-equation g(τ).
    Oracle(commands::OracleArgs),
    /// Monte Carlo period trajectories or photon streams.
    Simulate(commands::SimulateArgs),
    /// Least-squares fit of a model family to correlation data.
    Fit(fit_cmd::FitArgs),
    /// Figure presets.
    Reproduce(reproduce::ReproduceArgs),
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Gtau(a) => commands::gtau(a),
        Command::GzeroScan(a) => commands::gzero_scan(a),
        Command::Coupling(a) => commands::coupling(a),
        Command::Rates(a) => commands::rates(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Fit(a) => fit_cmd::fit(a),
        Command::Reproduce(a) => reproduce::reproduce(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("blinking: {e}");
            e.exit_code()
        }
    }
}
