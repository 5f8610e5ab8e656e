use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// A rectangular table of already-formatted cells.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Report {
    pub pass: bool,
    pub summary: String,
    pub json: Value,
    pub table: Option<Table>,
}

#[derive(Copy, Clone, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Writes the report to `out` (or stdout with `default` format).
pub fn emit(report: &Report, out: Option<&Path>, default: Format) -> Result<()> {
    let format = match out {
        Some(p) if p.extension().is_some_and(|e| e == "csv") => Format::Csv,
        Some(_) => Format::Json,
        None => default,
    };
    let bytes = match (format, &report.table) {
        (Format::Csv, Some(table)) => csv_bytes(table)?,
        _ => {
            let mut s = serde_json::to_string_pretty(&report.json)?;
            s.push('\n');
            s.into_bytes()
        }
    };
    match out {
        Some(path) => std::fs::write(path, bytes)
            .with_context(|| format!("writing report to {}", path.display()))?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn csv_bytes(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(std::iter::once("schema_version").chain(table.header.iter().copied()))?;
    let version = SCHEMA_VERSION.to_string();
    for row in &table.rows {
        w.write_record(std::iter::once(version.as_str()).chain(row.iter().map(String::as_str)))?;
    }
    Ok(w.into_inner()?)
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
