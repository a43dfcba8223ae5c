//! `instanton`: verification suite, coordinate transforms, field grids,
//! geodesic runs and separated wave solutions for a confocal focal triple.
//!
//! Exit codes: 0 success, 1 a verification check failed or a run broke
//! down, 2 invalid configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod args;
mod commands;
mod emit;

use commands::{geodesic, potential, transform, verify, waves};

#[derive(Debug, Parser)]
#[command(name = "instanton", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the verification suite and emit a report (exit 1 if any check fails)
    Verify(verify::VerifyArgs),
    /// Convert a point between Cartesian and ellipsoidal coordinates
    Transform(transform::TransformArgs),
    /// Sample V and the connection ω on a rectangular grid
    Potential(potential::PotentialArgs),
    /// Integrate the reduced geodesic flow from one initial state
    Geodesic(geodesic::GeodesicArgs),
    /// Integrate the separated wave equations and report the PDE residual
    Waves(waves::WavesArgs),
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or an initial state outside the domain (exit 2).
    Config(anyhow::Error),
    /// Checks failed; the report has already been written (exit 1).
    Checks,
    /// A run broke down after starting (exit 1).
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

impl From<instanton_core::Error> for Failure {
    fn from(e: instanton_core::Error) -> Self {
        Failure::Run(e.into())
    }
}

pub trait ConfigContext<T> {
    fn config(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ConfigContext<T> for Result<T, E> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify::run(&a),
        Command::Transform(a) => transform::run(&a),
        Command::Potential(a) => potential::run(&a),
        Command::Geodesic(a) => geodesic::run(&a),
        Command::Waves(a) => waves::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
