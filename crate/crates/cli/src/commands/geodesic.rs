use anyhow::{anyhow, Context};
use clap::Args;
use instanton_core::dynamics::{integrate, shell_state, IntegrationConfig};
use instanton_core::nalgebra::Vector3;
use instanton_core::{CartesianPoint, ReducedState, Trajectory};

use crate::args::{parse_vec3, positive, Common, Format};
use crate::emit::{self, opt_real, real};
use crate::{ConfigContext, Failure};

const HEADER: [&str; 12] = [
    "t",
    "x",
    "y",
    "z",
    "p_x",
    "p_y",
    "p_z",
    "H",
    "a",
    "b",
    "collinearity_residual",
    "status",
];

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    #[command(flatten)]
    common: Common,

    /// Initial position x,y,z
    #[arg(
        long,
        default_value = "1.118034,0.816497,0.763763",
        allow_hyphen_values = true
    )]
    x0: String,

    /// Initial canonical momentum px,py,pz
    #[arg(long, default_value = "0.2,-0.1,0.05", allow_hyphen_values = true)]
    p0: String,

    /// Rescale --p0 (as a direction) onto the shell H = 1/2
    #[arg(long)]
    on_shell: bool,

    /// Charge e of the circle momentum
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    e: f64,

    /// Integration time; negative runs backward
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    t: f64,

    /// Relative and absolute error tolerance of the adaptive integrator
    #[arg(long, default_value = "1e-10")]
    tol: f64,

    /// Stop once λ − λ₃ falls below guard·(λ₃ − λ₁)
    #[arg(long, default_value_t = 1e-3)]
    guard: f64,

    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn rows(traj: &Trajectory) -> Vec<Vec<String>> {
    let last = traj.samples.len() - 1;
    traj.samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let x = s.state.position;
            let p = s.state.momentum;
            let sep = s.separation;
            let status = if k == last {
                traj.status.as_str()
            } else {
                "running"
            };
            vec![
                real(s.t),
                real(x.x),
                real(x.y),
                real(x.z),
                real(p[0]),
                real(p[1]),
                real(p[2]),
                real(s.hamiltonian),
                opt_real(sep.map(|(l, _)| l.a)),
                opt_real(sep.map(|(l, _)| l.b)),
                opt_real(sep.map(|(_, r)| r)),
                status.to_owned(),
            ]
        })
        .collect()
}

pub fn run(a: &GeodesicArgs) -> Result<(), Failure> {
    let f = a.common.triple().config()?;
    let [x, y, z] = parse_vec3(&a.x0).context("--x0").config()?;
    let p0 = parse_vec3(&a.p0).context("--p0").config()?;
    if !a.e.is_finite() || !a.t.is_finite() {
        return Err(Failure::Config(anyhow!("--e and --t must be finite")));
    }
    let cfg = IntegrationConfig {
        tol: positive("--tol", a.tol).config()?,
        guard: positive("--guard", a.guard).config()?,
    };
    let x0 = CartesianPoint::new(x, y, z);
    let s0 = if a.on_shell {
        shell_state(&x0, &Vector3::from(p0), a.e, &f).config()?
    } else {
        ReducedState::new(x0, p0, a.e)
    };
    let traj = integrate(&s0, &f, a.t, &cfg).map_err(|e| {
        // a bad starting point is a configuration problem; anything later is the run's
        match e {
            instanton_core::Error::NonFiniteState { .. }
            | instanton_core::Error::StepUnderflow { .. } => Failure::Run(e.into()),
            other => Failure::Config(other.into()),
        }
    })?;
    let table = rows(&traj);
    let path = a.common.output.as_deref();
    match a.format {
        Format::Csv => emit::write_csv(path, &HEADER, &table)?,
        Format::Json => emit::write_json(path, &emit::rows_as_json(&HEADER, &table))?,
    }
    eprintln!(
        "{} steps, status {}, max |ΔH| {}",
        table.len() - 1,
        traj.status.as_str(),
        real(traj.max_energy_drift())
    );
    Ok(())
}
