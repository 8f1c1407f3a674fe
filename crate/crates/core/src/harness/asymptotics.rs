//! Convergence of each rescaled filament to the Oseen vortex.

use std::time::Instant;

use crate::domain_fields::{lp_norm, Filament, ScalarField};
use crate::dynamics::SimulationState;
use crate::error::{Error, Result};
use crate::harness::config::RunConfig;
use crate::harness::fit::log_log_fit;
use crate::harness::ledger::{AsymptoticsRow, RunLedger};
use crate::selfsim::{bridge, energies, oseen_distance, EnergyReport, FilamentEnergy, FrameProjector, RescaledFrame};

const POSITIVITY_TOL: f64 = 1e-12;
const L1_SLACK: f64 = 1e-3;

/// `max_x t omega(x) exp(|x - x_i|^2 / 8t)`: the smallest `C` with
/// `omega <= (C/t) exp(-|x - x_i|^2 / 8t)` on the grid.
pub fn envelope_constant(omega: &ScalarField, filament: &Filament, t: f64) -> f64 {
    let g = omega.grid();
    let mut c: f64 = 0.0;
    for i in 0..g.n_r() {
        let dr2 = (g.r(i) - filament.r).powi(2);
        for (j, &v) in omega.row(i).iter().enumerate() {
            if v > 0.0 {
                let q = dr2 + (g.z(j) - filament.z).powi(2);
                c = c.max(t * v * (q / (8.0 * t)).exp());
            }
        }
    }
    c
}

/// Positivity and L1 checks on the total vorticity, appended to the ledger.
/// Returns whether both held.
pub(crate) fn check_state(ledger: &mut RunLedger, state: &SimulationState, label: &str) -> Result<bool> {
    let w = &state.omega_total;
    let linf = w.max_abs();
    let min = w.min();
    let pos = min >= -POSITIVITY_TOL * linf;
    let l1 = lp_norm(w, 1.0)?;
    let budget = state.config().total_circulation() * (1.0 + L1_SLACK);
    let mass = l1 <= budget;
    ledger.push_check(
        &format!("{label} positivity t={:.4e}", state.t),
        pos,
        format!("min {min:.3e}, max {linf:.3e}"),
    );
    ledger.push_check(
        &format!("{label} l1 bound t={:.4e}", state.t),
        mass,
        format!("|omega|_1 = {l1:.10} <= {budget:.10}"),
    );
    Ok(pos && mass)
}

fn validate_times(cfg: &RunConfig, t_list: &[f64]) -> Result<Vec<f64>> {
    if t_list.is_empty() {
        return Err(Error::invalid("empty list of checkpoint times"));
    }
    if t_list.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::invalid("checkpoint times must be positive and finite"));
    }
    let d = cfg.filaments.d();
    let mut t = t_list.to_vec();
    t.sort_by(f64::total_cmp);
    t.dedup();
    if let Some(bad) = t.iter().find(|t| t.sqrt() > d / 2.0) {
        return Err(Error::invalid(format!(
            "t = {bad:.4e} is outside the window sqrt(t) <= d/2 = {:.4e}",
            d / 2.0
        )));
    }
    Ok(t)
}

/// Evolves from `t0 = min(t_list) / 4` and records the Oseen distance,
/// energies and envelope constants of every filament at each time.
///
/// Ledger contents:
/// * `rows`: one [`AsymptoticsRow`] per time and filament;
/// * `series["l1_dist_i"]`, `series["envelope_c_i"]`: per-checkpoint values;
/// * `calibration["envelope_c0_i"]`: sup of the initial datum times `t0`;
///   `calibration["envelope_c0_sampled_i"]`: the same on the grid;
/// * `calibration["rate_ratio_max_over_min_i"]`, `calibration["l1_dist_slope_i"]`
///   and `calibration["l1_dist_slope_r2_i"]` over the admissible times.
pub fn run_asymptotics(cfg: &RunConfig, t_list: &[f64]) -> Result<RunLedger> {
    let times = validate_times(cfg, t_list)?;
    let start = Instant::now();
    let fil = cfg.filaments.filaments().to_vec();
    let d = cfg.filaments.d();
    let t0 = times[0] / 4.0;
    let mut params = cfg.solver.clone();
    params.t_start = t0;
    params.t_end = *times.last().unwrap();
    let mut ledger = RunLedger::new("asymptotics", Some(cfg.clone()), String::new());
    let mut state = SimulationState::initialize_filaments(&cfg.filaments, t0, &params)?;
    for (i, f) in fil.iter().enumerate() {
        // The initial part is (alpha/4 pi t0) exp(-rho^2/4t0) exactly.
        ledger.calibrate(&format!("envelope_c0_{i}"), f.alpha / (4.0 * std::f64::consts::PI))?;
        ledger.calibrate(
            &format!("envelope_c0_sampled_{i}"),
            envelope_constant(&state.omega_parts[i], f, t0),
        )?;
    }
    ledger.time("setup", start.elapsed().as_secs_f64());

    let ext = cfg.diagnostics.frame_extent;
    let res = cfg.diagnostics.frame_resolution;
    for &t in &times {
        let clock = Instant::now();
        state.advance_to(t)?;
        ledger.time("evolve", clock.elapsed().as_secs_f64());
        let clock = Instant::now();
        check_state(&mut ledger, &state, "asymptotics")?;
        let admissible = t.sqrt() <= d / 8.0;
        if !admissible {
            ledger.push_check(
                &format!("diagnostic window t={t:.4e}"),
                true,
                format!("flagged: sqrt(t) > d/8 = {:.4e}, rate ratio not reported", d / 8.0),
            );
        }
        let mut per = Vec::with_capacity(fil.len());
        for (i, f) in fil.iter().enumerate() {
            let proj = FrameProjector::new(state.grid(), *f, t, ext, res)?;
            let frame = RescaledFrame::from_projector(&proj, i, &state.omega_parts[i])?;
            let f0 = proj.background_f0(d)?;
            let (e, cal_e) = energies(&frame, &f0)?;
            let dist = oseen_distance(&frame);
            let b = bridge(&frame, &f0, e)?;
            ledger.push_check(
                &format!("bridge i={i} t={t:.4e}"),
                b.holds(),
                format!("{:.4e} <= {:.4e}", b.distance, b.bound()),
            );
            let rate = t.sqrt() * t.ln().abs();
            ledger.rows.push(AsymptoticsRow {
                t,
                i,
                eps: frame.epsilon,
                e,
                cal_e,
                l1_dist: dist,
                rate_ratio: admissible.then_some(dist / rate),
            });
            ledger.push_series(&format!("l1_dist_{i}"), dist);
            ledger.push_series(&format!("envelope_c_{i}"), envelope_constant(&state.omega_parts[i], f, t));
            per.push(FilamentEnergy { e, cal_e, l1_dist: dist });
        }
        let report = EnergyReport::new(t, per);
        ledger.push_check(
            &format!("energy ordering t={t:.4e}"),
            report.is_consistent(),
            "0 <= E_i <= calE_i",
        );
        ledger.checkpoints.push(report);
        ledger.push_series("t", t);
        ledger.time("diagnostics", clock.elapsed().as_secs_f64());
    }

    for i in 0..fil.len() {
        let pts: Vec<(f64, f64, f64)> = ledger
            .rows
            .iter()
            .filter(|r| r.i == i)
            .filter_map(|r| r.rate_ratio.map(|q| (r.t, r.l1_dist, q)))
            .collect();
        if pts.len() < 2 {
            continue;
        }
        let (lo, hi) = pts
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.2), hi.max(p.2)));
        ledger.calibrate(&format!("rate_ratio_max_over_min_{i}"), hi / lo)?;
        let tt: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let dd: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if let Ok(fit) = log_log_fit(&tt, &dd) {
            ledger.calibrate(&format!("l1_dist_slope_{i}"), fit.slope)?;
            ledger.calibrate(&format!("l1_dist_slope_r2_{i}"), fit.r2)?;
        }
    }
    ledger.calibrate("steps", state.log.len() as f64)?;
    ledger.calibrate("regrids", state.regrid_count() as f64)?;
    ledger.time("total", start.elapsed().as_secs_f64());
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_fields::{FilamentConfig, Grid};
    use crate::dynamics::{gaussian, SolverParams};

    #[test]
    fn envelope_of_exact_gaussian_is_its_peak() {
        let t = 1e-4;
        let f = Filament { alpha: 2.0, r: 1.0, z: 0.0 };
        // Cell centres on the filament position.
        let g = Grid::new(0.80125, 1.19875, -0.19875, 0.19875, 159, 159).unwrap();
        let w = ScalarField::from_fn(g, gaussian(2.0, 1.0, 0.0, t));
        let c = envelope_constant(&w, &f, t);
        assert!((c - 2.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-12, "{c}");
    }

    #[test]
    fn times_outside_the_window_are_rejected() {
        let fil = FilamentConfig::single(1.0, 1.0, 0.0).unwrap();
        let cfg = RunConfig::new(fil, SolverParams::default());
        assert!(run_asymptotics(&cfg, &[0.3]).is_err());
        assert!(run_asymptotics(&cfg, &[]).is_err());
        assert!(run_asymptotics(&cfg, &[-1.0]).is_err());
    }
}
