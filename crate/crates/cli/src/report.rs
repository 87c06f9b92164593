//! Run results: assertions, CSV tables, plots and the JSON report.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::RunError;

/// One checked inequality `lhs relation rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub relation: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Assertion {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), relation: "<=", lhs, rhs, holds: lhs <= rhs }
    }

    pub fn lt(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), relation: "<", lhs, rhs, holds: lhs < rhs }
    }

    pub fn ge(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), relation: ">=", lhs, rhs, holds: lhs >= rhs }
    }

    pub fn gt(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), relation: ">", lhs, rhs, holds: lhs > rhs }
    }
}

/// A CSV file: header plus rows of preformatted cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, columns: &[&str]) -> Self {
        Self { file: file.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip decimal form, so CSV bytes depend only on the values.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Everything an experiment produced, filled in incrementally so a
/// numerical failure still leaves the finished part reportable.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub summary: Map<String, Value>,
    pub items: Vec<Value>,
    pub assertions: Vec<Assertion>,
    pub tables: Vec<Table>,
    /// (file name, SVG text).
    pub plots: Vec<(String, String)>,
}

impl Outcome {
    pub fn note(&mut self, key: &str, v: impl Serialize) {
        self.summary.insert(key.into(), serde_json::to_value(v).expect("summary values serialize"));
    }

    pub fn item(&mut self, v: impl Serialize) {
        self.items.push(serde_json::to_value(v).expect("items serialize"));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    AssertionFailure,
    Nonconvergence,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssertionSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub experiment_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub config: Value,
    pub status: Status,
    pub error: Option<String>,
    pub parallel_backend: bool,
    pub summary: Map<String, Value>,
    pub assertion_summary: AssertionSummary,
    pub assertions: Vec<Assertion>,
    pub items: Vec<Value>,
    pub outputs: Vec<String>,
    pub timings: Timings,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Passed => 0,
            Status::AssertionFailure => 1,
            Status::Nonconvergence => 3,
        }
    }
}

fn write_csv(dir: &Path, t: &Table) -> Result<PathBuf, RunError> {
    let path = dir.join(&t.file);
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(&t.columns).map_err(csv_err)?;
    for r in &t.rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(path)
}

fn csv_err(e: csv::Error) -> RunError {
    RunError::Io(std::io::Error::other(e.to_string()))
}

/// Writes the CSVs, plots and `report.json` into `dir`.
pub fn write_outputs(dir: &Path, outcome: &Outcome, mut report: RunReport) -> Result<RunReport, RunError> {
    fs::create_dir_all(dir)?;
    let mut outputs = Vec::new();
    for t in &outcome.tables {
        write_csv(dir, t)?;
        outputs.push(t.file.clone());
    }
    for (name, svg) in &outcome.plots {
        fs::write(dir.join(name), svg)?;
        outputs.push(name.clone());
    }
    outputs.push("report.json".into());
    report.outputs = outputs;
    let text = serde_json::to_string_pretty(&report).map_err(|e| RunError::Io(std::io::Error::other(e)))?;
    fs::write(dir.join("report.json"), text + "\n")?;
    Ok(report)
}
