//! Speed induced on one filament's near field by the other filament.

use serde::{Deserialize, Serialize};

use crate::domain_fields::VectorField;
use crate::dynamics::SimulationState;
use crate::error::{Error, Result};
use crate::harness::asymptotics::check_state;
use crate::harness::config::RunConfig;
use crate::harness::fit::{log_log_fit, LinearFit};
use crate::harness::ledger::RunLedger;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionSweep {
    pub times: Vec<f64>,
    /// `M(t)`, the rescaled cross-induced speed.
    pub metric: Vec<f64>,
    /// Log-log fit of `M` against `t`; `None` if `M` vanishes somewhere.
    pub fit: Option<LinearFit>,
    pub ledger: RunLedger,
}

fn max_speed_in_disc(u: &VectorField, rc: f64, zc: f64, radius: f64) -> f64 {
    let g = u.grid();
    let r2 = radius * radius;
    let mut m: f64 = 0.0;
    for i in 0..g.n_r() {
        let dr2 = (g.r(i) - rc).powi(2);
        if dr2 > r2 {
            continue;
        }
        for j in 0..g.n_z() {
            if dr2 + (g.z(j) - zc).powi(2) <= r2 {
                m = m.max(u.u_r.at(i, j).hypot(u.u_z.at(i, j)));
            }
        }
    }
    m
}

/// `sqrt(t) * max_{|x - x_i| <= d/4} |BS[omega_j](x)|` for the partner `j`
/// of filament `i`: the speed induced on the near field `|X| <= d/(4 sqrt t)`
/// of `i`, in rescaled units.
pub fn cross_speed(state: &mut SimulationState, i: usize) -> Result<f64> {
    let fil = state.config().filaments().to_vec();
    if fil.len() != 2 || i > 1 {
        return Err(Error::invalid(format!(
            "interaction needs two filaments, got {} (index {i})",
            fil.len()
        )));
    }
    let d = state.config().d();
    let u_other = state.part_velocity(1 - i)?;
    Ok(state.t.sqrt() * max_speed_in_disc(&u_other, fil[i].r, fil[i].z, d / 4.0))
}

/// `M(t)`: the larger of the two cross speeds.
pub fn interaction_metric(state: &mut SimulationState) -> Result<f64> {
    Ok(cross_speed(state, 0)?.max(cross_speed(state, 1)?))
}

/// Evolves a pair from `min(t_list) / 4` and records `M(t)` at each time.
pub fn run_interaction_sweep(cfg: &RunConfig, t_list: &[f64]) -> Result<InteractionSweep> {
    if cfg.filaments.len() != 2 {
        return Err(Error::invalid(format!(
            "interaction sweep needs n = 2, got {}",
            cfg.filaments.len()
        )));
    }
    let mut times = t_list.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.is_empty() || !(times[0] > 0.0) {
        return Err(Error::invalid("need positive checkpoint times"));
    }
    let d = cfg.filaments.d();
    if let Some(bad) = times.iter().find(|t| t.sqrt() > d / 2.0) {
        return Err(Error::invalid(format!("t = {bad:.4e} violates sqrt(t) <= d/2")));
    }
    let start = std::time::Instant::now();
    let mut params = cfg.solver.clone();
    params.t_start = times[0] / 4.0;
    params.t_end = *times.last().unwrap();
    let mut ledger = RunLedger::new("interaction", Some(cfg.clone()), String::new());
    let mut state = SimulationState::initialize_filaments(&cfg.filaments, params.t_start, &params)?;
    let mut metric = Vec::with_capacity(times.len());
    for &t in &times {
        state.advance_to(t)?;
        check_state(&mut ledger, &state, "interaction")?;
        let m = interaction_metric(&mut state)?;
        ledger.push_series("t", t);
        ledger.push_series("interaction_metric", m);
        metric.push(m);
    }
    let fit = log_log_fit(&times, &metric).ok();
    if let Some(f) = fit {
        ledger.calibrate("interaction_slope", f.slope)?;
        ledger.calibrate("interaction_r2", f.r2)?;
    }
    ledger.time("total", start.elapsed().as_secs_f64());
    Ok(InteractionSweep {
        times,
        metric,
        fit,
        ledger,
    })
}
