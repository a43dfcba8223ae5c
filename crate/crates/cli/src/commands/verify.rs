use std::time::Instant;

use anyhow::Context;
use clap::Args;
use instanton_core::{verify, VerifyConfig};

use crate::args::{positive, Common, Format};
use crate::emit::{self, real};
use crate::{ConfigContext, Failure};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    common: Common,

    /// Sample points for the finite-difference checks; the dense checks use ten times as many
    #[arg(long, default_value_t = 100)]
    samples: usize,

    /// Seed for every random sample
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Finite-difference step
    #[arg(long, default_value_t = 1e-3)]
    h: f64,

    /// Geodesic integration tolerance
    #[arg(long, default_value = "1e-10")]
    tol: f64,

    /// Report format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

pub fn run(a: &VerifyArgs) -> Result<(), Failure> {
    let f = a.common.triple().config()?;
    if a.samples == 0 {
        return Err(Failure::Config(anyhow::anyhow!(
            "--samples must be at least 1"
        )));
    }
    let cfg = VerifyConfig {
        samples: a.samples,
        seed: a.seed,
        h: positive("--h", a.h).config()?,
        tol: positive("--tol", a.tol).config()?,
    };
    let start = Instant::now();
    let report = verify::run(&f, &cfg);
    // wall time stays out of the report so reruns compare byte for byte
    eprintln!(
        "{} checks, {} failed, {:.2}s",
        report.checks.len(),
        report.checks.iter().filter(|c| !c.passed).count(),
        start.elapsed().as_secs_f64()
    );
    let path = a.common.output.as_deref();
    match a.format {
        Format::Json => emit::write_json(path, &report),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        real(c.max_residual),
                        real(c.tolerance),
                        c.passed.to_string(),
                        c.samples.to_string(),
                        c.note.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            emit::write_csv(
                path,
                &[
                    "name",
                    "max_residual",
                    "tolerance",
                    "passed",
                    "samples",
                    "note",
                ],
                &rows,
            )
        }
    }
    .context("writing the report")?;
    if report.passed {
        Ok(())
    } else {
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!(
                "FAILED {}: {} > {}",
                c.name,
                real(c.max_residual),
                real(c.tolerance)
            );
        }
        Err(Failure::Checks)
    }
}
