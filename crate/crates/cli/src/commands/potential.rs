use clap::Args;
use instanton_core::field::sample;
use instanton_core::sampling::is_guarded;
use instanton_core::{CartesianPoint, FocalTriple};

use crate::args::{parse_grid, positive, Common, Format};
use crate::emit::{self, opt_real, real};
use crate::{ConfigContext, Failure};

const HEADER: [&str; 8] = ["x", "y", "z", "V", "omega1", "omega2", "omega3", "masked"];

#[derive(Debug, Args)]
pub struct PotentialArgs {
    #[command(flatten)]
    common: Common,

    /// Grid as lo:hi:count for all axes, or three such specs separated by commas
    #[arg(long, default_value = "-5:5:21", allow_hyphen_values = true)]
    grid: String,

    /// Nodes closer than guard·(λ₃−λ₁) to a coordinate plane are masked (guard itself for the flat triple)
    #[arg(long, default_value_t = 0.05)]
    guard: f64,

    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// One grid node. Values the field cannot produce at the node are left empty.
fn row(c: CartesianPoint, f: &FocalTriple, guard: f64) -> Vec<String> {
    let s = sample(&c, f).ok();
    let v = s.map(|s| s.v);
    let w = s.and_then(|s| s.omega);
    let masked = is_guarded(&c, f, guard) || s.is_none();
    vec![
        real(c.x),
        real(c.y),
        real(c.z),
        opt_real(v),
        opt_real(w.map(|w| w[0])),
        opt_real(w.map(|w| w[1])),
        opt_real(w.map(|w| w[2])),
        u8::from(masked).to_string(),
    ]
}

pub fn run(a: &PotentialArgs) -> Result<(), Failure> {
    let f = a.common.triple().config()?;
    let [gx, gy, gz] = parse_grid(&a.grid).config()?;
    let guard = positive("--guard", a.guard).config()?;
    let mut rows = Vec::with_capacity(gx.count * gy.count * gz.count);
    for x in gx.values() {
        for y in gy.values() {
            for z in gz.values() {
                rows.push(row(CartesianPoint::new(x, y, z), &f, guard));
            }
        }
    }
    let path = a.common.output.as_deref();
    match a.format {
        Format::Csv => emit::write_csv(path, &HEADER, &rows)?,
        Format::Json => emit::write_json(path, &emit::rows_as_json(&HEADER, &rows))?,
    }
    Ok(())
}
