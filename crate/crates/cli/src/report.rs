//! Versioned experiment reports with CSV and JSON emission. The CSV is the
//! plotting interface and is byte-identical across runs of the same
//! (config, seed); timings live only in the JSON.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// One numeric result row, tagged with the producing statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    /// Scale parameter of the row (t, M, q, level, …); 0 when not applicable.
    pub scale: f64,
    /// Lebesgue exponent in play; 0 when not applicable.
    pub p: f64,
    /// Block count / sample count in play; 0 when not applicable.
    pub n: u64,
    pub statistic: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    /// Echo of every config key the experiment read (with defaults filled in).
    pub config: BTreeMap<String, String>,
    pub rows: Vec<Row>,
    /// Wall-clock per phase; excluded from the CSV so it stays reproducible.
    pub timings_ms: BTreeMap<String, u64>,
    pub passed: bool,
    /// False when a budget stop left the report partial.
    pub complete: bool,
}

impl Report {
    pub fn new(experiment: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            config,
            rows: Vec::new(),
            timings_ms: BTreeMap::new(),
            passed: true,
            complete: true,
        }
    }

    pub fn push(&mut self, row: Row) {
        self.passed &= row.pass;
        self.rows.push(row);
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push_stat(
        &mut self,
        scale: f64,
        p: f64,
        n: u64,
        statistic: &str,
        value: f64,
        tolerance: f64,
        pass: bool,
    ) {
        self.push(Row {
            experiment: self.experiment.clone(),
            scale,
            p,
            n,
            statistic: statistic.to_string(),
            value,
            tolerance,
            pass,
        });
    }

    pub fn record_timing(&mut self, phase: &str, ms: u64) {
        self.timings_ms.insert(phase.to_string(), ms);
    }

    /// CSV with the fixed column schema; floats printed as `{:.12e}` so the
    /// bytes depend only on the values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment,scale,p,n,statistic,value,tolerance,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.12e},{:.12e},{},{},{:.12e},{:.12e},{}\n",
                r.experiment, r.scale, r.p, r.n, r.statistic, r.value, r.tolerance, r.pass
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Writes `<out>/<experiment>.<ext>` in the requested format and returns
    /// the path.
    pub fn emit(&self, out_dir: &Path, format: OutputFormat) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(out_dir)?;
        let (ext, body) = match format {
            OutputFormat::Csv => ("csv", self.to_csv()),
            OutputFormat::Json => ("json", self.to_json()),
        };
        let path = out_dir.join(format!("{}.{}", self.experiment, ext));
        let mut f = std::fs::File::create(&path)?;
        f.write_all(body.as_bytes())?;
        Ok(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut cfg = BTreeMap::new();
        cfg.insert("seed".to_string(), "7".to_string());
        let mut r = Report::new("demo", cfg);
        r.push_stat(2.0, 2.0, 8, "ratio", 0.5, 1.0, true);
        r.push_stat(4.0, 2.0, 8, "ratio", 1.5, 1.0, false);
        r.record_timing("family", 12);
        r
    }

    #[test]
    fn pass_flag_aggregates() {
        let r = sample();
        assert!(!r.passed);
    }

    #[test]
    fn csv_schema() {
        let r = sample();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "experiment,scale,p,n,statistic,value,tolerance,pass");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("demo,"));
        // header-only for an empty report
        let empty = Report::new("e", BTreeMap::new());
        assert_eq!(empty.to_csv().lines().count(), 1);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
