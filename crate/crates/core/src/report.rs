//! Experiment reports: JSON for verdicts and witnesses, CSV for tables.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Table {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// One pass/fail line of a report. `invariant` marks checks whose failure
/// means a bound or identity the theory guarantees was violated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub invariant: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    /// Verdicts, witnesses and other structured results.
    pub results: serde_json::Map<String, Value>,
    pub notes: Vec<String>,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Report {
        Report {
            experiment: config.experiment.name().into(),
            config: config.clone(),
            checks: Vec::new(),
            tables: Vec::new(),
            results: serde_json::Map::new(),
            notes: Vec::new(),
            elapsed_ms: 0,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, invariant: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, invariant, detail: detail.into() });
    }

    pub fn result<T: Serialize>(&mut self, key: &str, value: &T) -> Result<(), ReportError> {
        self.results.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn invariant_violations(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.invariant && !c.passed).collect()
    }

    /// Writes `<experiment>.json` and one `<experiment>_<table>.csv` per
    /// table into `dir`; returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ReportError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        let json = dir.join(format!("{}.json", self.experiment));
        std::fs::write(&json, serde_json::to_string_pretty(self)?).map_err(io(&json))?;
        written.push(json);
        for t in &self.tables {
            let path = dir.join(format!("{}_{}.csv", self.experiment, t.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&t.columns)?;
            for r in &t.rows {
                w.write_record(r)?;
            }
            w.flush().map_err(io(&path))?;
            written.push(path);
        }
        Ok(written)
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut s = format!("{} ({} ms)\n", self.experiment, self.elapsed_ms);
        for c in &self.checks {
            s.push_str(&format!("  [{}] {}: {}\n", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail));
        }
        for n in &self.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentKind;

    #[test]
    fn writes_json_and_csv() {
        let cfg = ExperimentConfig::new(ExperimentKind::Example61);
        let mut r = Report::new(&cfg);
        let mut t = Table::new("lengths", &["n", "length"]);
        t.push(vec!["1".into(), "2".into()]);
        r.tables.push(t);
        r.check("lengths", true, true, "ok");
        r.check("growth", false, false, "slow");
        r.result("answer", &42).unwrap();
        assert!(r.invariant_violations().is_empty());
        let dir = std::env::temp_dir().join(format!("cat0-report-{}", std::process::id()));
        let files = r.write(&dir).unwrap();
        assert_eq!(files.len(), 2);
        let csv = std::fs::read_to_string(&files[1]).unwrap();
        assert_eq!(csv, "n,length\n1,2\n");
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(v["results"]["answer"], 42);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
