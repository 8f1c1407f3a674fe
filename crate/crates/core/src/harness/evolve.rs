//! Plain evolution with field dumps and per-step diagnostics.

use std::path::Path;

use crate::dynamics::SimulationState;
use crate::error::{Error, Result};
use crate::harness::asymptotics::check_state;
use crate::harness::config::RunConfig;
use crate::harness::io::{write_diagnostics, write_field_dump};
use crate::harness::ledger::RunLedger;

const PART_SUM_TOL: f64 = 1e-5;

/// Evolves from `solver.t_start` through the configured checkpoints, writing
/// `diagnostics.csv` and (optionally) `omega_kNNN.txt` and
/// `omega_part{i}_kNNN.txt` dumps into `out`. Invariant breaches at a
/// checkpoint are reported after all files are written.
pub fn evolve(cfg: &RunConfig, out: &Path) -> Result<RunLedger> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let start = std::time::Instant::now();
    let mut ledger = RunLedger::new("evolve", Some(cfg.clone()), String::new());
    let mut state = SimulationState::initialize_filaments(&cfg.filaments, cfg.solver.t_start, &cfg.solver)?;
    let mut times = vec![cfg.solver.t_start];
    times.extend(cfg.checkpoints().into_iter().filter(|t| *t > cfg.solver.t_start));
    let mut healthy = true;
    let mut result = Ok(());
    for (k, &t) in times.iter().enumerate() {
        if let Err(e) = state.advance_to(t) {
            result = Err(e);
            break;
        }
        healthy &= check_state(&mut ledger, &state, "evolve")?;
        let defect = state.part_sum_defect();
        let ok = defect <= PART_SUM_TOL;
        healthy &= ok;
        ledger.push_check(&format!("part sum t={t:.4e}"), ok, format!("{defect:.3e}"));
        ledger.push_series("t", t);
        if cfg.diagnostics.dump_fields {
            write_field_dump(&out.join(format!("omega_k{k:03}.txt")), &state.omega_total)?;
            for (i, p) in state.omega_parts.iter().enumerate() {
                write_field_dump(&out.join(format!("omega_part{i}_k{k:03}.txt")), p)?;
            }
        }
    }
    write_diagnostics(&out.join("diagnostics.csv"), &state.log)?;
    ledger.time("total", start.elapsed().as_secs_f64());
    result?;
    if !healthy {
        let failed: Vec<String> = ledger.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        return Err(Error::InvariantBreach(failed.join("; ")));
    }
    Ok(ledger)
}
