use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use instanton_core::sampling;
use instanton_core::waves::{integrate_branch, pde_residual, ResidualBox};
use instanton_core::{Branch, BranchOde, BranchStatus, ProductSolution};
use serde::Serialize;

use crate::args::{positive, Common, Format};
use crate::emit::{self, real};
use crate::{ConfigContext, Failure};

const HEADER: [&str; 4] = ["branch", "xi", "u", "du"];

/// Offset applied to `a` on the λ branch for the sensitivity figure.
const OFFSET: f64 = 0.1;

#[derive(Debug, Args)]
pub struct WavesArgs {
    #[command(flatten)]
    common: Common,

    /// Energy eigen-parameter E
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    energy: f64,

    /// Separation constant a
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a: f64,

    /// Separation constant b
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    b: f64,

    /// Sample points per branch
    #[arg(long, default_value_t = 101)]
    samples: usize,

    /// Interior points for the PDE residual
    #[arg(long, default_value_t = 50)]
    points: usize,

    /// Seed for the residual points
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Finite-difference step of the residual Laplacian, in units of √(λ₃−λ₁)
    #[arg(long, default_value_t = 1e-3)]
    h: f64,

    /// Branch integration tolerance
    #[arg(long, default_value = "1e-10")]
    tol: f64,

    /// The λ branch runs from λ₃ to λ₃ + extent·(λ₃−λ₁)
    #[arg(long, default_value_t = 1.0)]
    extent: f64,

    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Serialize)]
struct BranchSummary {
    branch: Branch,
    lo: f64,
    hi: f64,
    samples: usize,
    status: BranchStatus,
}

#[derive(Serialize)]
struct Summary {
    lambdas: [f64; 3],
    energy: f64,
    a: f64,
    b: f64,
    anchor: [f64; 3],
    points: usize,
    h: f64,
    pde_residual: f64,
    /// Residual with `a` offset on the λ branch only; should exceed `pde_residual`.
    offset_residual: f64,
    branches: Vec<BranchSummary>,
}

#[derive(Serialize)]
struct Full<'a> {
    summary: &'a Summary,
    samples: serde_json::Value,
}

fn summary_path(output: &std::path::Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".summary.json");
    PathBuf::from(s)
}

pub fn run(a: &WavesArgs) -> Result<(), Failure> {
    let f = a.common.triple().config()?;
    if !(a.energy.is_finite() && a.a.is_finite() && a.b.is_finite()) {
        return Err(Failure::Config(anyhow!(
            "--energy, --a and --b must be finite"
        )));
    }
    if a.samples < 2 || a.points == 0 {
        return Err(Failure::Config(anyhow!(
            "need --samples ≥ 2 and --points ≥ 1"
        )));
    }
    let tol = positive("--tol", a.tol).config()?;
    let extent = positive("--extent", a.extent).config()?;
    let h = positive("--h", a.h).config()? * f.length_scale();

    let mut rows = Vec::new();
    let mut branches = Vec::new();
    for branch in Branch::ALL {
        let ode = BranchOde::on_branch(branch, &f, a.energy, a.a, a.b, extent).config()?;
        let sol = integrate_branch(&ode, &f, 1.0, 0.0, a.samples, tol)?;
        for k in 0..sol.xi.len() {
            rows.push(vec![
                branch.name().to_owned(),
                real(sol.xi[k]),
                real(sol.u[k]),
                real(sol.du[k]),
            ]);
        }
        branches.push(BranchSummary {
            branch,
            lo: ode.lo,
            hi: ode.hi,
            samples: sol.xi.len(),
            status: sol.status,
        });
    }

    let region = ResidualBox::around_default(&f).config()?;
    let points = region.points(&mut sampling::rng(a.seed), a.points, &f);
    let product = ProductSolution::new(&f, &region.anchor, a.energy, a.a, a.b).config()?;
    let residual = pde_residual(&product, &points, h)?;
    let offset = product.with_branch_constants(Branch::Lambda, a.a + OFFSET, a.b);
    let offset_residual = pde_residual(&offset, &points, h)?;

    let summary = Summary {
        lambdas: f.as_array(),
        energy: a.energy,
        a: a.a,
        b: a.b,
        anchor: region.anchor.coords(),
        points: points.len(),
        h,
        pde_residual: residual,
        offset_residual,
        branches,
    };
    let path = a.common.output.as_deref();
    match a.format {
        Format::Csv => {
            emit::write_csv(path, &HEADER, &rows)?;
            match path {
                Some(p) => emit::write_json(Some(&summary_path(p)), &summary)?,
                None => eprintln!(
                    "{}",
                    serde_json::to_string_pretty(&summary).map_err(anyhow::Error::from)?
                ),
            }
        }
        Format::Json => emit::write_json(
            path,
            &Full {
                summary: &summary,
                samples: emit::rows_as_json(&HEADER, &rows),
            },
        )?,
    }
    Ok(())
}
