//! Run configuration: a TOML document with a `schema_version` field.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain_fields::FilamentConfig;
use crate::dynamics::SolverParams;
use crate::error::{Error, Result};
use crate::selfsim::DEFAULT_CUTOFF;

pub const SCHEMA_VERSION: u32 = 1;

/// Rescaled-frame and checkpoint settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Checkpoint times; empty means nine per decade between `t_start` and `t_end`.
    pub times: Vec<f64>,
    pub frame_extent: f64,
    pub frame_resolution: usize,
    /// Write a field dump at every checkpoint of `evolve`.
    pub dump_fields: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            times: Vec::new(),
            frame_extent: 10.0,
            frame_resolution: 256,
            dump_fields: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    /// Relative weighted-L2 size of the perturbation added to the second run.
    pub perturbation: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { perturbation: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub filaments: FilamentConfig,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub probe: ProbeConfig,
}

impl RunConfig {
    pub fn new(filaments: FilamentConfig, solver: SolverParams) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            filaments,
            solver,
            diagnostics: DiagnosticsConfig::default(),
            probe: ProbeConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads and validates a config file; also returns its content hash.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml(&text)?;
        Ok((cfg, content_hash(text.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.solver.validate()?;
        let d = &self.diagnostics;
        if !(d.frame_extent >= DEFAULT_CUTOFF) || d.frame_resolution < 8 {
            return Err(Error::Config(format!(
                "frame_extent must be at least the energy cutoff {DEFAULT_CUTOFF} and frame_resolution >= 8"
            )));
        }
        if d.times.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::Config("checkpoint times must be positive".into()));
        }
        if !(self.probe.perturbation >= 0.0 && self.probe.perturbation <= 1e-2) {
            return Err(Error::Config(format!(
                "probe.perturbation must lie in [0, 1e-2], got {}",
                self.probe.perturbation
            )));
        }
        Ok(())
    }

    /// Checkpoints: the configured list, or nine per decade over the run.
    pub fn checkpoints(&self) -> Vec<f64> {
        if !self.diagnostics.times.is_empty() {
            let mut t = self.diagnostics.times.clone();
            t.sort_by(f64::total_cmp);
            t.dedup();
            return t;
        }
        geometric_times(self.solver.t_start, self.solver.t_end, 8)
    }
}

/// `t_lo * 10^(k / per_decade)` up to `t_hi` (inclusive within round-off).
pub fn geometric_times(t_lo: f64, t_hi: f64, per_decade: u32) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let t = t_lo * 10f64.powf(k as f64 / per_decade as f64);
        if t > t_hi * (1.0 + 1e-12) {
            break;
        }
        out.push(t.min(t_hi));
        k += 1;
    }
    out
}

/// Git-style object hash: SHA-256 of `"blob <len>\0" + content`, hex encoded.
pub fn content_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
