use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{Number, Value};

use crate::manifest::RunManifest;
use crate::CliError;

/// Decimal text with 17 significant digits, enough to round-trip any f64.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        return String::from("0.0");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

/// A JSON number carrying [`sig17`] text; non-finite values become null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    sig17(x).parse::<Number>().map(Value::Number).unwrap_or(Value::Null)
}

fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json(mut doc: Value, manifest: &RunManifest, path: Option<&Path>) -> Result<(), CliError> {
    if let Value::Object(map) = &mut doc {
        map.insert(String::from("manifest"), serde_json::to_value(manifest)?);
    }
    let mut out = open(path)?;
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// RFC 4180 table preceded by `# manifest: {...}` on a comment line.
pub fn write_csv(
    header: &[&str],
    rows: &[Vec<String>],
    manifest: &RunManifest,
    path: Option<&Path>,
) -> Result<(), CliError> {
    let mut out = open(path)?;
    writeln!(out, "# manifest: {}", serde_json::to_string(manifest)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => sig17(v),
        _ => String::new(),
    }
}
