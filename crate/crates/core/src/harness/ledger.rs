//! Run ledger and report emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::RunConfig;
use crate::harness::io::fmt;
use crate::selfsim::EnergyReport;

/// One row of the asymptotics table. `rate_ratio` is absent at times
/// outside the diagnostic window `sqrt(t) <= d/8`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsRow {
    pub t: f64,
    pub i: usize,
    pub eps: f64,
    pub e: f64,
    pub cal_e: f64,
    pub l1_dist: f64,
    pub rate_ratio: Option<f64>,
}

/// One asserted property with its measured value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything needed to reproduce and audit a run. Entries are only ever
/// appended.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLedger {
    pub kind: String,
    pub config: Option<RunConfig>,
    pub config_hash: String,
    pub checkpoints: Vec<EnergyReport>,
    pub rows: Vec<AsymptoticsRow>,
    pub calibration: BTreeMap<String, f64>,
    /// Measured time series keyed by name, aligned with `checkpoints` unless
    /// the name says otherwise.
    pub series: BTreeMap<String, Vec<f64>>,
    pub checks: Vec<Check>,
    pub timings: BTreeMap<String, f64>,
}

impl RunLedger {
    pub fn new(kind: &str, config: Option<RunConfig>, config_hash: String) -> Self {
        RunLedger {
            kind: kind.to_string(),
            config,
            config_hash,
            checkpoints: Vec::new(),
            rows: Vec::new(),
            calibration: BTreeMap::new(),
            series: BTreeMap::new(),
            checks: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn push_check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    /// Records a calibration constant; an existing key is never overwritten.
    pub fn calibrate(&mut self, key: &str, value: f64) -> Result<()> {
        if self.calibration.contains_key(key) {
            return Err(Error::invalid(format!("calibration {key} already recorded")));
        }
        self.calibration.insert(key.to_string(), value);
        Ok(())
    }

    pub fn push_series(&mut self, key: &str, value: f64) {
        self.series.entry(key.to_string()).or_default().push(value);
    }

    pub fn time(&mut self, key: &str, seconds: f64) {
        *self.timings.entry(key.to_string()).or_insert(0.0) += seconds;
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Writes `report.json`, `summary.csv` and `summary.txt` into `dir`.
pub fn emit_report(ledger: &RunLedger, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json_path = dir.join("report.json");
    let json = serde_json::to_string_pretty(ledger).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;

    let csv_path = dir.join("summary.csv");
    let mut csv = String::from("t,i,eps,E_i,calE_i,l1_dist,rate_ratio\n");
    for r in &ledger.rows {
        csv.push_str(&row_line(r));
        csv.push('\n');
    }
    std::fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;

    let txt_path = dir.join("summary.txt");
    std::fs::write(&txt_path, summary_text(ledger)).map_err(|e| Error::io(&txt_path, e))?;
    Ok(())
}

/// CSV line of one row; an absent rate ratio is an empty cell.
pub fn row_line(r: &AsymptoticsRow) -> String {
    let ratio = r.rate_ratio.map(fmt).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{ratio}",
        fmt(r.t),
        r.i,
        fmt(r.eps),
        fmt(r.e),
        fmt(r.cal_e),
        fmt(r.l1_dist)
    )
}

pub fn summary_text(ledger: &RunLedger) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "run: {}", ledger.kind);
    let _ = writeln!(s, "config hash: {}", ledger.config_hash);
    let _ = writeln!(s, "checkpoints: {}", ledger.checkpoints.len());
    for (k, v) in &ledger.calibration {
        let _ = writeln!(s, "calibration {k} = {v:.6e}");
    }
    for c in &ledger.checks {
        let _ = writeln!(s, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let passed = ledger.checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(s, "{passed}/{} checks passed", ledger.checks.len());
    s
}

pub fn load_report(path: &Path) -> Result<RunLedger> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selfsim::FilamentEnergy;

    #[test]
    fn empty_ledger_emits_valid_report() {
        let dir = tempfile::tempdir().unwrap();
        let l = RunLedger::new("empty", None, String::new());
        emit_report(&l, dir.path()).unwrap();
        let back = load_report(&dir.path().join("report.json")).unwrap();
        assert_eq!(back, l);
        assert!(back.checkpoints.is_empty());
        let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut l = RunLedger::new("asymptotics", None, "abc".into());
        let e = FilamentEnergy {
            e: 1.0 / 3.0,
            cal_e: std::f64::consts::PI * 1e-7,
            l1_dist: 2.0f64.sqrt() * 1e-3,
        };
        l.checkpoints.push(EnergyReport::new(1.234567890123e-4, vec![e]));
        l.rows.push(AsymptoticsRow {
            t: 1e-4,
            i: 0,
            eps: 0.01,
            e: 1.0 / 7.0,
            cal_e: 0.3,
            l1_dist: 0.1,
            rate_ratio: None,
        });
        l.push_series("envelope_c_0", 0.1 + 0.2);
        l.calibrate("envelope_c", 0.0795774715459477).unwrap();
        assert!(l.calibrate("envelope_c", 1.0).is_err());
        l.push_check("positivity", true, "min 0");
        emit_report(&l, dir.path()).unwrap();
        let back = load_report(&dir.path().join("report.json")).unwrap();
        assert_eq!(back, l);
        let text = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
        assert!(text.contains("[PASS] positivity"));
    }
}
