//! Experiment drivers, run configuration, ledgers and reports.

mod asymptotics;
pub mod config;
pub mod criteria;
mod evolve;
pub mod fit;
mod interaction;
pub mod io;
pub mod ledger;
mod probe;
mod verify;

pub use asymptotics::{envelope_constant, run_asymptotics};
pub use config::{content_hash, geometric_times, DiagnosticsConfig, ProbeConfig, RunConfig, SCHEMA_VERSION};
pub use evolve::evolve;
pub use fit::{linear_fit, log_log_fit, LinearFit};
pub use interaction::{cross_speed, interaction_metric, run_interaction_sweep, InteractionSweep};
pub use ledger::{emit_report, load_report, AsymptoticsRow, Check, RunLedger};
pub use probe::{probe_profile, run_uniqueness_probe, ProbeResult};
pub use verify::{bilinear, sample_points, verify_bs, BsSample, BsVerification};
