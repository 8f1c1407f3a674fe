use serde::{Deserialize, Serialize};

use crate::biot_savart::{BiotSavart, BsSolveReport};
use crate::domain_fields::{lp_norm, FilamentConfig, Grid, ScalarField, VectorField};
use crate::dynamics::operators::{self, FaceVelocity, Limiter};
use crate::dynamics::params::{DiffusionMode, SolverParams};
use crate::dynamics::staging::{restrict_to, CoreBox, Staging};
use crate::error::{Error, Result};
use crate::exec;

const PART_SUM_TOL: f64 = 1e-8;
const POSITIVITY_TOL: f64 = 1e-12;
const L1_SLACK: f64 = 1e-3;
const MAX_HALVINGS: u32 = 5;

/// Diagnostics of one accepted step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub l1_total: f64,
    pub linf_total: f64,
    pub l1_parts: Vec<f64>,
    pub pos_min: f64,
    pub div_max: f64,
    pub dt: f64,
    pub bs_iters: usize,
}

/// Total vorticity, its per-filament parts and the shared velocity.
///
/// `omega_total` is evolved as a field of its own rather than re-summed from
/// the parts; the part-sum identity is then a genuine check of linearity of
/// the transport at frozen velocity and limiter.
#[derive(Clone, Debug)]
pub struct SimulationState {
    pub t: f64,
    pub omega_total: ScalarField,
    pub omega_parts: Vec<ScalarField>,
    pub velocity: VectorField,
    pub log: Vec<StepRecord>,
    config: FilamentConfig,
    params: SolverParams,
    staging: Staging,
    stage: u32,
    bs: BiotSavart,
    last_bs: BsSolveReport,
    regrids: usize,
}

/// Gaussian `(alpha / 4 pi t) exp(-|x - x_i|^2 / 4t)`.
pub fn gaussian(alpha: f64, rc: f64, zc: f64, t: f64) -> impl Fn(f64, f64) -> f64 + Sync + Send {
    move |r, z| {
        let q = (r - rc).powi(2) + (z - zc).powi(2);
        alpha / (4.0 * std::f64::consts::PI * t) * (-q / (4.0 * t)).exp()
    }
}

fn core_box(config: &FilamentConfig) -> CoreBox {
    let f = config.filaments();
    CoreBox {
        r_lo: f.iter().map(|x| x.r).fold(f64::INFINITY, f64::min),
        r_hi: f.iter().map(|x| x.r).fold(f64::NEG_INFINITY, f64::max),
        z_lo: f.iter().map(|x| x.z).fold(f64::INFINITY, f64::min),
        z_hi: f.iter().map(|x| x.z).fold(f64::NEG_INFINITY, f64::max),
    }
}

impl SimulationState {
    /// Gaussian parts of width `sqrt(t0)` on the first stage grid chosen by
    /// the staging policy in `params`.
    pub fn initialize_filaments(config: &FilamentConfig, t0: f64, params: &SolverParams) -> Result<Self> {
        params.validate()?;
        let staging = Staging {
            core: core_box(config),
            h0: t0.sqrt() / params.cells_per_sqrt_t,
            k: params.cells_per_sqrt_t,
            margin: params.domain_margin,
            t_end: params.t_end,
            enabled: params.regrid,
        };
        let grid = staging.grid(0, None)?;
        Self::build(config, t0, grid, params, staging)
    }

    /// Same as [`Self::initialize_filaments`] on a caller-supplied grid, with
    /// regridding disabled.
    pub fn initialize_on_grid(config: &FilamentConfig, t0: f64, grid: Grid, params: &SolverParams) -> Result<Self> {
        params.validate()?;
        let staging = Staging {
            core: core_box(config),
            h0: grid.h_r().max(grid.h_z()),
            k: params.cells_per_sqrt_t,
            margin: params.domain_margin,
            t_end: params.t_end,
            enabled: false,
        };
        Self::build(config, t0, grid, params, staging)
    }

    fn build(config: &FilamentConfig, t0: f64, grid: Grid, params: &SolverParams, staging: Staging) -> Result<Self> {
        if !(t0 > 0.0) {
            return Err(Error::invalid(format!("t0 must be positive, got {t0}")));
        }
        let d = config.d();
        if t0.sqrt() > d / 8.0 {
            return Err(Error::invalid(format!(
                "sqrt(t0) = {:.4e} exceeds d/8 = {:.4e}",
                t0.sqrt(),
                d / 8.0
            )));
        }
        let h = grid.h_r().max(grid.h_z());
        if (4.0 * t0).sqrt() < 4.0 * h * (1.0 - 1e-12) {
            return Err(Error::invalid(format!(
                "t0 = {t0:.4e} is not resolved: need max(h_r, h_z) <= sqrt(4 t0)/4 = {:.4e}, have {h:.4e}",
                (4.0 * t0).sqrt() / 4.0
            )));
        }
        let parts: Vec<ScalarField> = config
            .filaments()
            .iter()
            .map(|f| ScalarField::from_fn(grid, gaussian(f.alpha, f.r, f.z, t0)))
            .collect();
        let mut total = ScalarField::zeros(grid);
        for p in &parts {
            total.axpy(1.0, p)?;
        }
        let mut bs = BiotSavart::new(&grid, params.far_field, params.bs_tol)?;
        let (velocity, last_bs) = bs.solve(&total)?;
        let mut st = SimulationState {
            t: t0,
            omega_total: total,
            omega_parts: parts,
            velocity,
            log: Vec::new(),
            config: config.clone(),
            params: params.clone(),
            staging,
            stage: 0,
            bs,
            last_bs,
            regrids: 0,
        };
        st.record(0.0);
        Ok(st)
    }

    pub fn grid(&self) -> &Grid {
        self.omega_total.grid()
    }
    pub fn config(&self) -> &FilamentConfig {
        &self.config
    }
    pub fn params(&self) -> &SolverParams {
        &self.params
    }
    pub fn last_bs_report(&self) -> &BsSolveReport {
        &self.last_bs
    }
    pub fn regrid_count(&self) -> usize {
        self.regrids
    }

    /// Adds `scale * g((x - x_i)/sqrt(t))` times `alpha_i / t` to part `i` and
    /// to the total, with `g` given in rescaled coordinates.
    pub fn perturb_part<F>(&mut self, i: usize, g: F) -> Result<()>
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let f = *self
            .config
            .filaments()
            .get(i)
            .ok_or_else(|| Error::invalid(format!("no filament {i}")))?;
        let st = self.t.sqrt();
        let amp = f.alpha / self.t;
        let add = ScalarField::from_fn(*self.grid(), |r, z| amp * g((r - f.r) / st, (z - f.z) / st));
        self.omega_parts[i].axpy(1.0, &add)?;
        self.omega_total.axpy(1.0, &add)?;
        let (u, rep) = self.bs.solve(&self.omega_total)?;
        self.velocity = u;
        self.last_bs = rep;
        Ok(())
    }

    /// Zeroes part `i` and removes it from the total.
    pub fn clear_part(&mut self, i: usize) -> Result<()> {
        let p = self.omega_parts[i].clone();
        self.omega_total.axpy(-1.0, &p)?;
        self.omega_parts[i] = ScalarField::zeros(*self.grid());
        let (u, rep) = self.bs.solve(&self.omega_total)?;
        self.velocity = u;
        self.last_bs = rep;
        Ok(())
    }

    /// Velocity induced by part `j` alone.
    pub fn part_velocity(&mut self, j: usize) -> Result<VectorField> {
        let mut bs = BiotSavart::new(self.grid(), self.params.far_field, self.params.bs_tol)?;
        Ok(bs.solve(&self.omega_parts[j])?.0)
    }

    /// `|sum parts - total|_1 / |total|_1`.
    pub fn part_sum_defect(&self) -> f64 {
        part_sum_defect(&self.omega_total, &self.omega_parts)
    }

    /// Largest stable step at the current state.
    pub fn max_dt(&self) -> f64 {
        let g = self.grid();
        let h = g.h_r().min(g.h_z());
        let speed = self.velocity.max_speed();
        let adv = if speed > 0.0 { h / speed } else { f64::INFINITY };
        match self.params.diffusion_mode {
            DiffusionMode::Explicit => self.params.cfl_safety * adv.min(operators::diffusion_limit(g)),
            DiffusionMode::ImplicitSplitting => {
                (self.params.cfl_safety * adv).min(self.params.implicit_max_dt_over_t * self.t)
            }
        }
    }

    /// Advances by exactly `dt`, halving internally on invariant breaches.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        let limit = self.max_dt();
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::invalid(format!("dt = {dt:.4e} exceeds the stability limit {limit:.4e}")));
        }
        let target = self.t + dt;
        let mut sub = dt;
        let mut halvings = 0;
        while self.t < target {
            let h = sub.min(target - self.t);
            match self.try_step(h) {
                Ok(()) => {}
                Err(StepFailure::Invariant(reason)) => {
                    halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(Error::StepRejected { t: self.t, dt: h, reason });
                    }
                    sub = h / 2.0;
                }
                Err(StepFailure::Hard(e)) => return Err(e),
            }
        }
        self.t = target;
        Ok(())
    }

    /// Steps up to `t_target`, regridding at stage boundaries.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target * (1.0 - 1e-13) {
            let stage_end = self.staging.stage_end(self.stage);
            if self.t >= stage_end * (1.0 - 1e-12) {
                self.regrid()?;
                continue;
            }
            let mut dt = self.max_dt().min(t_target - self.t);
            if stage_end < t_target {
                dt = dt.min(stage_end - self.t);
            }
            self.step(dt)?;
            if (t_target - self.t).abs() <= 1e-13 * t_target {
                self.t = t_target;
            }
            if (stage_end - self.t).abs() <= 1e-13 * stage_end {
                self.t = stage_end;
            }
        }
        Ok(())
    }

    fn regrid(&mut self) -> Result<()> {
        let next = self.stage + 1;
        let grid = self.staging.grid(next, Some(self.grid()))?;
        self.omega_total = restrict_to(&self.omega_total, &grid)?;
        for p in self.omega_parts.iter_mut() {
            *p = restrict_to(p, &grid)?;
        }
        self.bs = BiotSavart::new(&grid, self.params.far_field, self.params.bs_tol)?;
        let (u, rep) = self.bs.solve(&self.omega_total)?;
        self.velocity = u;
        self.last_bs = rep;
        self.stage = next;
        self.regrids += 1;
        Ok(())
    }

    fn solve(&mut self, total: &ScalarField) -> std::result::Result<VectorField, StepFailure> {
        let (u, rep) = self.bs.solve(total).map_err(StepFailure::Hard)?;
        self.last_bs = rep;
        Ok(u)
    }

    fn try_step(&mut self, dt: f64) -> std::result::Result<(), StepFailure> {
        let mut fields: Vec<ScalarField> = Vec::with_capacity(self.omega_parts.len() + 1);
        fields.push(self.omega_total.clone());
        fields.extend(self.omega_parts.iter().cloned());
        let u0 = self.velocity.clone();
        let mut iters = 0;
        let (new_fields, u_new) = match self.params.diffusion_mode {
            DiffusionMode::Explicit => {
                let f1 = euler_all(&fields, &u0, dt, true);
                let u1 = self.solve(&f1[0])?;
                iters += self.last_bs.iterations;
                let f2 = euler_all(&f1, &u1, dt, true);
                let out: Vec<ScalarField> = fields.iter().zip(&f2).map(|(a, b)| average(a, b)).collect();
                let u2 = self.solve(&out[0])?;
                iters += self.last_bs.iterations;
                (out, u2)
            }
            DiffusionMode::ImplicitSplitting => {
                let half = 0.5 * dt;
                let a = self.transport_rk2(&fields, &u0, half, &mut iters)?;
                let d: Vec<ScalarField> = a.iter().map(|f| operators::implicit_diffusion(f, dt)).collect();
                let ud = self.solve(&d[0])?;
                iters += self.last_bs.iterations;
                let out = self.transport_rk2(&d, &ud, half, &mut iters)?;
                let u2 = self.solve(&out[0])?;
                iters += self.last_bs.iterations;
                (out, u2)
            }
        };
        let total = &new_fields[0];
        let parts = &new_fields[1..];
        if !new_fields.iter().all(|f| f.is_finite()) {
            return Err(StepFailure::Invariant("non-finite vorticity".into()));
        }
        let max = total.max_abs();
        let min = total.min();
        if min < -POSITIVITY_TOL * max {
            return Err(StepFailure::Invariant(format!("positivity: min {min:.3e} vs max {max:.3e}")));
        }
        let l1 = lp_norm(total, 1.0).map_err(StepFailure::Hard)?;
        let budget = self.config.total_circulation() * (1.0 + L1_SLACK);
        if l1 > budget {
            return Err(StepFailure::Invariant(format!("L1 norm {l1:.6e} exceeds {budget:.6e}")));
        }
        let defect = part_sum_defect(total, parts);
        if defect > PART_SUM_TOL {
            return Err(StepFailure::Invariant(format!("part-sum defect {defect:.3e}")));
        }
        let mut it = new_fields.into_iter();
        self.omega_total = it.next().unwrap();
        self.omega_parts = it.collect();
        self.velocity = u_new;
        self.t += dt;
        self.last_bs.iterations = iters;
        self.record(dt);
        Ok(())
    }

    fn transport_rk2(
        &mut self,
        fields: &[ScalarField],
        u0: &VectorField,
        dt: f64,
        iters: &mut usize,
    ) -> std::result::Result<Vec<ScalarField>, StepFailure> {
        let f1 = euler_all(fields, u0, dt, false);
        let u1 = self.solve(&f1[0])?;
        *iters += self.last_bs.iterations;
        let f2 = euler_all(&f1, &u1, dt, false);
        Ok(fields.iter().zip(&f2).map(|(a, b)| average(a, b)).collect())
    }

    fn record(&mut self, dt: f64) {
        let l1_parts = self
            .omega_parts
            .iter()
            .map(|p| lp_norm(p, 1.0).unwrap_or(f64::NAN))
            .collect();
        self.log.push(StepRecord {
            t: self.t,
            l1_total: lp_norm(&self.omega_total, 1.0).unwrap_or(f64::NAN),
            linf_total: self.omega_total.max_abs(),
            l1_parts,
            pos_min: self.omega_total.min(),
            div_max: self.last_bs.divergence_max,
            dt,
            bs_iters: self.last_bs.iterations,
        });
    }
}

enum StepFailure {
    Invariant(String),
    Hard(Error),
}

pub(crate) fn part_sum_defect(total: &ScalarField, parts: &[ScalarField]) -> f64 {
    let g = *total.grid();
    let nz = g.n_z();
    let num = exec::sum_rows(g.n_r(), |i| {
        let mut acc = 0.0;
        for j in 0..nz {
            let k = i * nz + j;
            let s: f64 = parts.iter().map(|p| p.values()[k]).sum();
            acc += (s - total.values()[k]).abs();
        }
        acc
    });
    let den = exec::sum_rows(g.n_r(), |i| total.row(i).iter().map(|v| v.abs()).sum::<f64>());
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Forward-Euler stage `f + dt R(f)` for every field with the shared velocity
/// and the limiter of `fields[0]`.
fn euler_all(fields: &[ScalarField], u: &VectorField, dt: f64, with_diffusion: bool) -> Vec<ScalarField> {
    let lim = Limiter::from_reference(&fields[0]);
    let vel = FaceVelocity::from_cells(u);
    fields
        .iter()
        .map(|f| euler(f, &vel, &lim, dt, with_diffusion))
        .collect()
}

pub(crate) fn euler(f: &ScalarField, vel: &FaceVelocity, lim: &Limiter, dt: f64, with_diffusion: bool) -> ScalarField {
    let g = *f.grid();
    let mut rhs = vec![0.0; g.len()];
    if with_diffusion {
        operators::diffusion(f, &mut rhs);
    }
    operators::advection_add(f, vel, lim, &mut rhs);
    let vals: Vec<f64> = f.values().iter().zip(&rhs).map(|(a, b)| a + dt * b).collect();
    ScalarField::from_raw(g, vals)
}

pub(crate) fn average(a: &ScalarField, b: &ScalarField) -> ScalarField {
    let vals = a.values().iter().zip(b.values()).map(|(x, y)| 0.5 * (x + y)).collect();
    ScalarField::from_raw(*a.grid(), vals)
}
