use anyhow::Context;
use clap::{ArgGroup, Args};
use instanton_core::confocal::{from_cartesian, to_cartesian};
use instanton_core::{CartesianPoint, EllipsoidalPoint};
use serde::Serialize;

use crate::args::{parse_octant, parse_vec3, Common, Format};
use crate::emit::{self, real};
use crate::{ConfigContext, Failure};

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["point", "ellipsoidal"])))]
pub struct TransformArgs {
    #[command(flatten)]
    common: Common,

    /// Cartesian point x,y,z
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,

    /// Ellipsoidal point λ,μ,ν
    #[arg(long, allow_hyphen_values = true)]
    ellipsoidal: Option<String>,

    /// Octant signs for --ellipsoidal, e.g. +,-,+
    #[arg(long, default_value = "+,+,+", allow_hyphen_values = true)]
    octant: String,

    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Serialize)]
struct Echo {
    lambdas: [f64; 3],
    cartesian: CartesianPoint,
    ellipsoidal: EllipsoidalPoint,
}

pub fn run(a: &TransformArgs) -> Result<(), Failure> {
    let f = a.common.triple().config()?;
    let (cartesian, ellipsoidal) = if let Some(p) = &a.point {
        let [x, y, z] = parse_vec3(p).context("--point").config()?;
        let c = CartesianPoint::new(x, y, z);
        (c, from_cartesian(&c, &f).config()?)
    } else {
        let s = a.ellipsoidal.as_deref().expect("clap requires one input");
        let [l, m, n] = parse_vec3(s).context("--ellipsoidal").config()?;
        let octant = parse_octant(&a.octant).context("--octant").config()?;
        let q = EllipsoidalPoint::new(l, m, n).with_octant(octant);
        let c = to_cartesian(&q, &f).config()?;
        // re-derive so the endpoint flags reflect the point actually reached
        (c, from_cartesian(&c, &f).config()?)
    };
    let path = a.common.output.as_deref();
    match a.format {
        Format::Json => emit::write_json(
            path,
            &Echo {
                lambdas: f.as_array(),
                cartesian,
                ellipsoidal,
            },
        )?,
        Format::Csv => {
            let [sx, sy, sz] = ellipsoidal.octant.signs();
            let row = vec![
                real(cartesian.x),
                real(cartesian.y),
                real(cartesian.z),
                real(ellipsoidal.lambda),
                real(ellipsoidal.mu),
                real(ellipsoidal.nu),
                sx.to_string(),
                sy.to_string(),
                sz.to_string(),
            ];
            emit::write_csv(
                path,
                &[
                    "x", "y", "z", "lambda", "mu", "nu", "sign_x", "sign_y", "sign_z",
                ],
                &[row],
            )?
        }
    }
    Ok(())
}
