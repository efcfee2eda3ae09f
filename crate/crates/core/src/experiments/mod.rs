//! Runners that reproduce the numerical examples: coefficient decay suites,
//! the discontinuous-function comparison, the L-shaped domain study, the
//! cubature integration examples and the polynomial chaos example.
//!
//! Every runner returns a serializable result and can write CSV tables plus a
//! JSON summary. Numbers in CSV files carry 17 significant digits.

pub mod builtins;
pub mod decay;
pub mod gpc;
pub mod integration;
pub mod lshape;
mod lshape_tables;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Formats a float with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// A CSV table held as already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Writes `tables` as `<name>.csv` and `summary` as `<json_name>` into `dir`,
/// creating it if needed. Returns the written paths in order.
pub fn write_outputs<T: Serialize>(
    dir: &Path,
    tables: &[(&str, &Table)],
    json_name: &str,
    summary: &T,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for (name, t) in tables {
        let p = dir.join(format!("{name}.csv"));
        t.write_csv(&p)?;
        out.push(p);
    }
    let p = dir.join(json_name);
    write_json(&p, summary)?;
    out.push(p);
    Ok(out)
}

pub fn index_string(e: &[u32]) -> String {
    e.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}
