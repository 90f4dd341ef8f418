//! Experiment reports: a JSON document plus one CSV file per table.
//!
//! The numerical payload (config echo, tables, targets, checks, notes and
//! cell errors) is a pure function of the config; wall-clock time and the
//! worker count sit outside it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};

/// Version of the report layout and of every CSV column set.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub payload: Payload,
    pub wall_clock_seconds: f64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Payload {
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
    pub targets: Vec<Target>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Cells aborted by an error; the remaining cells still ran.
    pub errors: Vec<CellError>,
}

impl Payload {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            config,
            tables: Vec::new(),
            targets: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.errors.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn target(&self, name: &str) -> Option<&Target> {
        self.targets.iter().find(|t| t.name == name)
    }

    pub(crate) fn push_check(
        &mut self,
        name: impl Into<String>,
        passed: bool,
        measured: f64,
        detail: impl Into<String>,
    ) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            measured,
            detail: detail.into(),
        });
    }

    pub(crate) fn push_target(
        &mut self,
        name: impl Into<String>,
        value: f64,
        source: impl Into<String>,
    ) {
        self.targets.push(Target {
            name: name.into(),
            value,
            source: source.into(),
        });
    }

    pub(crate) fn push_error(&mut self, cell: impl Into<String>, error: impl ToString) {
        self.errors.push(CellError {
            cell: cell.into(),
            message: error.to_string(),
        });
    }

    /// Canonical serialization used for determinism comparisons.
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("payload serializes")
    }
}

/// Reference value with a label saying how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub name: String,
    pub value: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub cell: String,
    pub message: String,
}

/// Rectangular table; missing entries are `None` and print as empty CSV
/// fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|v| v.map(|x| format!("{x}")).unwrap_or_default())
                .collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

impl ExperimentReport {
    pub fn all_passed(&self) -> bool {
        self.payload.all_passed()
    }

    /// Writes `<id>.report.json` and `<id>.<table>.csv` into `dir`; returns
    /// the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        let id = self.payload.config.experiment.id();
        let mut written = Vec::new();
        let json = dir.join(format!("{id}.report.json"));
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        fs::write(&json, text).map_err(|e| LabError::io(&json, e))?;
        written.push(json);
        for table in &self.payload.tables {
            let path = dir.join(format!("{id}.{}.csv", table.name));
            fs::write(&path, table.to_csv()).map_err(|e| LabError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .payload
            .checks
            .iter()
            .map(|c| {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                format!("{verdict} {}: {} ({})", c.name, short(c.measured), c.detail)
            })
            .collect();
        lines.extend(
            self.payload
                .errors
                .iter()
                .map(|e| format!("ERROR {}: {}", e.cell, e.message)),
        );
        lines
    }
}

/// Six decimals, switching to exponent form outside `[1e-3, 1e6)`.
fn short(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-3..1e6).contains(&a) {
        format!("{}", (x * 1e6).round() / 1e6)
    } else {
        format!("{x:.5e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Experiment, L2Identity};

    fn report() -> ExperimentReport {
        let config = ExperimentConfig::new(Experiment::L2Identity(L2Identity::default()), 1);
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            tool_version: "test".into(),
            payload: Payload::new(config),
            wall_clock_seconds: 0.0,
            workers: 1,
        }
    }

    #[test]
    fn empty_report_is_a_valid_skeleton() {
        let r = report();
        let value: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(value["schema_version"], 1);
        assert_eq!(
            value["payload"]["config"]["experiment"]["kind"],
            "l2-identity"
        );
        assert!(r.all_passed());
    }

    #[test]
    fn short_numbers() {
        assert_eq!(short(0.10217599999999999), "0.102176");
        assert_eq!(short(4.353306122448988e-7), "4.35331e-7");
        assert_eq!(short(0.0), "0");
    }

    #[test]
    fn csv_has_header_and_blank_missing_fields() {
        let mut t = Table::new("torus", &["lambda", "replica", "length", "count"]);
        t.push(vec![Some(100.0), Some(0.0), Some(35.5), None]);
        assert_eq!(t.to_csv(), "lambda,replica,length,count\n100,0,35.5,\n");
    }

    #[test]
    fn writes_json_and_tables() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = report();
        r.payload.tables.push(Table::new("cells", &["a"]));
        let files = r.write(dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let back: ExperimentReport =
            serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
