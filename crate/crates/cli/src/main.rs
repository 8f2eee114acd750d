//! Command-line front end: spectra, qubit Hamiltonians, sampling runs and
//! classical baselines.

mod commands;
mod config;
mod error;
mod model_source;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{baseline, pauli, qsci, spectrum, validate};

#[derive(Debug, Parser)]
#[command(name = "rovib", version, about = "Rovibrational levels by dense diagonalization and sampled subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest levels of the Hamiltonian or a subset of its term groups.
    Spectrum(spectrum::SpectrumArgs),
    /// Pauli decomposition, term statistics and L_q-vs-J fits.
    Pauli(pauli::PauliArgs),
    /// Trotter sampling and subspace diagonalization over a schedule.
    Qsci(qsci::QsciArgs),
    /// Classical comparison methods.
    Baseline(baseline::BaselineArgs),
    /// Load and check a molecule model.
    ModelValidate(validate::ValidateArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum(a) => spectrum::run(a),
        Command::Pauli(a) => pauli::run(a),
        Command::Qsci(a) => qsci::run(a),
        Command::Baseline(a) => baseline::run(a),
        Command::ModelValidate(a) => validate::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
