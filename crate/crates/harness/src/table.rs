//! Experiment output: a CSV table plus a JSON run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Config;
use crate::HarnessError;

/// Version of the column layouts; bumped whenever a header changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    /// Floats use 17 significant digits, enough to round-trip any `f64`.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(v) => Some(v as f64),
            Cell::Float(v) => Some(v),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Numeric values of column `name`.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let i = self.column_index(name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Rows whose text column `name` equals `value`.
    pub fn filter(&self, name: &str, value: &str) -> Table {
        let i = self.column_index(name).unwrap_or_else(|| panic!("no column {name}"));
        Table {
            columns: self.columns.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| matches!(&r[i], Cell::Text(s) if s == value))
                .cloned()
                .collect(),
        }
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io_err)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
    }
}

fn io_err(e: csv::Error) -> HarnessError {
    HarnessError::Io(e.to_string())
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    seed: u64,
    version: &'static str,
    schema_version: u32,
    columns: &'a [&'static str],
    csv: String,
    config: &'a Config,
}

/// Writes `<experiment>.csv` and `<experiment>.manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, experiment: &str, cfg: &Config, table: &Table) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let csv_name = format!("{experiment}.csv");
    let csv_path = dir.join(&csv_name);
    std::fs::write(&csv_path, table.to_csv()?)
        .map_err(|e| HarnessError::Io(format!("cannot write {}: {e}", csv_path.display())))?;
    let manifest = Manifest {
        experiment,
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        columns: &table.columns,
        csv: csv_name,
        config: cfg,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| HarnessError::Io(e.to_string()))?;
    let manifest_path = dir.join(format!("{experiment}.manifest.json"));
    std::fs::write(&manifest_path, json + "\n")
        .map_err(|e| HarnessError::Io(format!("cannot write {}: {e}", manifest_path.display())))?;
    Ok(vec![csv_path, manifest_path])
}
