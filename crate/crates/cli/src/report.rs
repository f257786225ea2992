//! Run reports and plot-data emission.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const REPORT_VERSION: u32 = 1;

/// One pass/fail invariant. Informational entries carry no tolerance and
/// always pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: Option<f64>,
    pub passed: bool,
    pub exact: bool,
}

impl Check {
    /// Passes when `value < tol`.
    pub fn below(name: &str, value: f64, tol: f64, exact: bool) -> Self {
        Check { name: name.into(), value, tol: Some(tol), passed: value < tol, exact }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, tol: None, passed: ok, exact: true }
    }

    pub fn info(name: &str, value: f64) -> Self {
        Check { name: name.into(), value, tol: None, passed: true, exact: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// A table destined for a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Series { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Int(v) => v.to_string(),
                Cell::Float(v) => v.to_string(),
                Cell::Text(v) => v.clone(),
            }))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: u32,
    pub kind: String,
    /// The effective configuration, after command-line overrides.
    pub config: ExperimentConfig,
    pub passed: bool,
    /// False when a bound the run relies on is divergent.
    pub conclusive: bool,
    /// All computations stayed inside the exact truncation regime.
    pub exact: bool,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub series: BTreeMap<String, Series>,
    /// Module-level reports, keyed by module operation.
    pub details: BTreeMap<String, serde_json::Value>,
    /// Wall-clock seconds per stage. Not reproducible.
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(config: ExperimentConfig) -> Self {
        RunReport {
            version: REPORT_VERSION,
            kind: config.experiment.kind().into(),
            config,
            passed: true,
            conclusive: true,
            exact: true,
            checks: Vec::new(),
            warnings: Vec::new(),
            series: BTreeMap::new(),
            details: BTreeMap::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn check(&mut self, check: Check) {
        self.passed &= check.passed;
        self.exact &= check.exact;
        self.checks.push(check);
    }

    pub fn detail<T: Serialize>(&mut self, key: &str, value: &T) -> Result<()> {
        let v = serde_json::to_value(value).map_err(|e| CliError::Serialize(e.to_string()))?;
        self.details.insert(key.into(), v);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Serialize(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
    }
}

/// Writes `series` of `report` as `<out_dir>/<series>.csv` and returns the path.
pub fn emit_plot_data(report: &RunReport, series: &str, out_dir: &Path) -> Result<PathBuf> {
    let data = report.series.get(series).ok_or_else(|| CliError::UnknownSeries {
        name: series.into(),
        available: report.series.keys().cloned().collect::<Vec<_>>().join(", "),
    })?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let path = out_dir.join(format!("{series}.csv"));
    let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    data.write_csv(std::io::BufWriter::new(file)).map_err(|e| CliError::Serialize(e.to_string()))?;
    Ok(path)
}
