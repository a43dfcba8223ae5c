//! Deterministic CSV and JSON output.
//!
//! Reals go out as shortest round-trip decimals, so identical runs give
//! identical bytes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// Shortest round-trip form; exponent notation for very large or small values.
pub fn real(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn write_csv(path: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink(path)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV rows as an array of objects keyed by the header; cells that parse as
/// numbers become numbers, empty cells become null.
pub fn rows_as_json(header: &[&str], rows: &[Vec<String>]) -> serde_json::Value {
    use serde_json::{Map, Number, Value};
    let cell = |s: &str| -> Value {
        if s.is_empty() {
            return Value::Null;
        }
        if let Ok(i) = s.parse::<i64>() {
            return Value::from(i);
        }
        match s.parse::<f64>().ok().and_then(Number::from_f64) {
            Some(n) => Value::Number(n),
            None => Value::String(s.to_owned()),
        }
    };
    Value::Array(
        rows.iter()
            .map(|row| {
                let obj: Map<String, Value> = header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| ((*k).to_owned(), cell(v)))
                    .collect();
                Value::Object(obj)
            })
            .collect(),
    )
}
