//! Two-solution uniqueness probe: the decay of the difference energy
//! between a reference run and a perturbed copy.

use serde::{Deserialize, Serialize};

use crate::domain_fields::lp_norm;
use crate::dynamics::SimulationState;
use crate::error::{Error, Result};
use crate::exec;
use crate::harness::config::RunConfig;
use crate::harness::fit::{log_log_fit, LinearFit};
use crate::selfsim::{background_f0, difference_energies, energies, FrameProjector, RescaledFrame};

/// Runs with a larger difference energy than this multiple of the initial one
/// have left the perturbative regime.
const DIVERGENCE_FACTOR: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub times: Vec<f64>,
    pub e_delta: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    /// `kappa` in `E^Delta(t) ~ t^(-kappa)`, fitted over the monotone tail.
    pub gronwall_exponent: Option<f64>,
    pub gronwall_fit: Option<LinearFit>,
    /// First checkpoint from which `E^Delta` decreases strictly to the end.
    pub monotone_after: Option<f64>,
}

impl ProbeResult {
    /// `E^Delta <= 2 (E^(1) + E^(2))` at every checkpoint.
    pub fn triangle_holds(&self) -> bool {
        self.e_delta
            .iter()
            .zip(self.e1.iter().zip(&self.e2))
            .all(|(d, (a, b))| *d <= 2.0 * (a + b) * (1.0 + 1e-12) + 1e-300)
    }
}

/// Weighted norm `|G|_X = (int G^2 e^{|X|^2/4} dX)^{1/2} = (4 pi)^{-1/2}`.
fn oseen_weighted_norm() -> f64 {
    (4.0 * std::f64::consts::PI).powf(-0.5)
}

/// Perturbation profile `c X_R exp(-|X|^2/2)` of weighted-L2 size `size |G|_X`.
/// `|X_R e^{-|X|^2/2}|_X^2 = 8 pi / 9`. Mean zero and odd in `R`; `G` plus it
/// stays positive for `size <= 0.5`.
pub fn probe_profile(size: f64) -> impl Fn(f64, f64) -> f64 + Sync + Send + Copy {
    let c = size * oseen_weighted_norm() / (8.0 * std::f64::consts::PI / 9.0).sqrt();
    move |x, y| c * x * (-(x * x + y * y) / 2.0).exp()
}

struct Arm {
    frames: Vec<Vec<RescaledFrame>>,
    energy: Vec<f64>,
}

fn arm(cfg: &RunConfig, times: &[f64], size: f64) -> Result<Arm> {
    let t0 = times[0];
    let mut params = cfg.solver.clone();
    params.t_start = t0;
    params.t_end = *times.last().unwrap();
    let mut state = SimulationState::initialize_filaments(&cfg.filaments, t0, &params)?;
    if size > 0.0 {
        for i in 0..cfg.filaments.len() {
            state.perturb_part(i, probe_profile(size))?;
        }
    }
    let fil = cfg.filaments.filaments().to_vec();
    let d = cfg.filaments.d();
    let budget = cfg.filaments.total_circulation() * 1.001;
    let (ext, res) = (cfg.diagnostics.frame_extent, cfg.diagnostics.frame_resolution);
    let mut out = Arm {
        frames: Vec::new(),
        energy: Vec::new(),
    };
    for &t in times {
        state.advance_to(t)?;
        let w = &state.omega_total;
        if w.min() < -1e-12 * w.max_abs() || lp_norm(w, 1.0)? > budget {
            return Err(Error::InvariantBreach(format!("probe run lost positivity or L1 bound at t = {t:.4e}")));
        }
        let mut frames = Vec::with_capacity(fil.len());
        let mut e_sum = 0.0;
        for (i, f) in fil.iter().enumerate() {
            let proj = FrameProjector::new(state.grid(), *f, t, ext, res)?;
            let frame = RescaledFrame::from_projector(&proj, i, &state.omega_parts[i])?;
            e_sum += energies(&frame, &proj.background_f0(d)?)?.0;
            frames.push(frame);
        }
        out.frames.push(frames);
        out.energy.push(e_sum);
    }
    Ok(out)
}

/// Index from which `v` decreases strictly to the end, if the last step
/// decreases at all.
fn monotone_tail(v: &[f64]) -> Option<usize> {
    let n = v.len();
    if n < 2 || !(v[n - 1] < v[n - 2]) {
        return None;
    }
    let mut k = n - 2;
    while k > 0 && v[k - 1] > v[k] {
        k -= 1;
    }
    Some(k)
}

/// Runs the reference and the perturbed simulation from `t0 = min(t_list)`
/// (concurrently when parallelism is enabled) and compares them at each time.
pub fn run_uniqueness_probe(cfg: &RunConfig, perturbation_size: f64, t_list: &[f64]) -> Result<ProbeResult> {
    if !(perturbation_size >= 0.0 && perturbation_size <= 1e-2) {
        return Err(Error::invalid(format!(
            "perturbation size must lie in [0, 1e-2], got {perturbation_size}"
        )));
    }
    let mut times = t_list.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.is_empty() || !(times[0] > 0.0) {
        return Err(Error::invalid("need positive checkpoint times"));
    }
    let (a, b) = exec::join(|| arm(cfg, &times, 0.0), || arm(cfg, &times, perturbation_size));
    let a = a?;
    let b = b.map_err(|e| match e {
        Error::InvariantBreach(m) | Error::StepRejected { reason: m, .. } => Error::ProbeDiverged(m),
        other => other,
    })?;
    let d = cfg.filaments.d();
    let mut e_delta = Vec::with_capacity(times.len());
    for (k, (fa, fb)) in a.frames.iter().zip(&b.frames).enumerate() {
        let mut sum = 0.0;
        for (x, y) in fa.iter().zip(fb) {
            // f_0 cancels in the difference; it only fixes the geometry.
            let f0 = background_f0(times[k], d, x.grid())?;
            sum += difference_energies(x, y, &f0)?.0;
        }
        e_delta.push(sum);
    }
    let e_init = e_delta[0];
    if let Some((k, v)) = e_delta.iter().enumerate().find(|(_, v)| **v > DIVERGENCE_FACTOR * e_init) {
        return Err(Error::ProbeDiverged(format!(
            "E_delta({:.4e}) = {v:.3e} exceeds {DIVERGENCE_FACTOR} x E_delta(t0) = {e_init:.3e}",
            times[k]
        )));
    }
    let tail = if e_init > 0.0 { monotone_tail(&e_delta) } else { None };
    let gronwall_fit = tail.and_then(|k| {
        if times.len() - k < 3 {
            return None;
        }
        log_log_fit(&times[k..], &e_delta[k..]).ok()
    });
    Ok(ProbeResult {
        monotone_after: tail.map(|k| times[k]),
        gronwall_exponent: gronwall_fit.map(|f| -f.slope),
        gronwall_fit,
        times,
        e_delta,
        e1: a.energy,
        e2: b.energy,
    })
}
