//! Parsers for comma- and colon-separated flag values.

use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use instanton_core::{FocalTriple, Octant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Focal constants λ₁,λ₂,λ₃ (nondecreasing)
    #[arg(long, default_value = "0,1,4", allow_hyphen_values = true)]
    pub lambdas: String,

    /// Write to this file instead of stdout
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

impl Common {
    pub fn triple(&self) -> Result<FocalTriple> {
        let [a, b, c] = parse_vec3(&self.lambdas).context("--lambdas")?;
        Ok(FocalTriple::new(a, b, c)?)
    }
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<T>()
                .map_err(|e| anyhow!("cannot parse {part:?}: {e}"))
        })
        .collect()
}

pub fn parse_vec3(s: &str) -> Result<[f64; 3]> {
    let v: Vec<f64> = parse_list(s)?;
    let arr: [f64; 3] = v.try_into().map_err(|v: Vec<f64>| {
        anyhow!("expected three comma-separated numbers, got {}", v.len())
    })?;
    if arr.iter().any(|x| !x.is_finite()) {
        bail!("values must be finite");
    }
    Ok(arr)
}

/// `+,-,+` or `1,-1,1`.
pub fn parse_octant(s: &str) -> Result<Octant> {
    let signs: Vec<i8> = s
        .split(',')
        .map(|p| match p.trim() {
            "+" | "1" | "+1" => Ok(1),
            "-" | "-1" => Ok(-1),
            other => Err(anyhow!("bad sign {other:?}; use + or -")),
        })
        .collect::<Result<_>>()?;
    match signs[..] {
        [a, b, c] => Ok(Octant::new(a, b, c)?),
        _ => bail!("expected three signs"),
    }
}

/// One axis of a sampling grid, `lo:hi:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.hi
                } else {
                    self.lo + step * k as f64
                }
            })
            .collect()
    }
}

impl FromStr for Axis {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            bail!("grid axis must be lo:hi:count, got {s:?}");
        };
        let lo: f64 = lo
            .trim()
            .parse()
            .with_context(|| format!("grid lo {lo:?}"))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .with_context(|| format!("grid hi {hi:?}"))?;
        let count: usize = count
            .trim()
            .parse()
            .with_context(|| format!("grid count {count:?}"))?;
        if !(lo.is_finite() && hi.is_finite()) || count == 0 || (count > 1 && !(lo < hi)) {
            bail!("grid axis needs finite lo < hi and count ≥ 1, got {s:?}");
        }
        Ok(Self { lo, hi, count })
    }
}

/// One `lo:hi:count` for all three axes, or three of them separated by commas.
pub fn parse_grid(s: &str) -> Result<[Axis; 3]> {
    let axes: Vec<Axis> = s.split(',').map(str::parse).collect::<Result<_>>()?;
    match axes[..] {
        [a] => Ok([a; 3]),
        [a, b, c] => Ok([a, b, c]),
        _ => bail!("grid takes one or three lo:hi:count specs"),
    }
}

pub fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        bail!("{name} must be positive, got {v}")
    }
}
