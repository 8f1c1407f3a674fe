//! The linear semigroup `S(t)` and the frozen-velocity transport step.

use crate::domain_fields::{ScalarField, VectorField};
use crate::dynamics::operators::{self, FaceVelocity, Limiter};
use crate::dynamics::params::DiffusionMode;
use crate::dynamics::staging::{restrict_to, Staging};
use crate::dynamics::state::{average, euler};
use crate::error::{Error, Result};

fn check_dt(f: &ScalarField, dt: f64, mode: DiffusionMode, cfl: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    if mode == DiffusionMode::Explicit {
        let limit = cfl * operators::diffusion_limit(f.grid());
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "explicit diffusion needs dt <= {limit:.4e}, got {dt:.4e}"
            )));
        }
    }
    Ok(())
}

/// One step of `d_t f = (d_r^2 + d_z^2 + (1/r) d_r - 1/r^2) f`: Heun's method
/// in explicit mode, backward-Euler LOD in implicit mode.
pub fn linear_step(f: &ScalarField, dt: f64, mode: DiffusionMode, cfl: f64) -> Result<ScalarField> {
    check_dt(f, dt, mode, cfl)?;
    Ok(match mode {
        DiffusionMode::Explicit => {
            let g = *f.grid();
            let stage = |x: &ScalarField| {
                let mut rhs = vec![0.0; g.len()];
                operators::diffusion(x, &mut rhs);
                let v = x.values().iter().zip(&rhs).map(|(a, b)| a + dt * b).collect();
                ScalarField::from_raw(g, v)
            };
            let f1 = stage(f);
            average(f, &stage(&f1))
        }
        DiffusionMode::ImplicitSplitting => operators::implicit_diffusion(f, dt),
    })
}

/// One step of `d_t f + div(u f) = L f` with `u` frozen.
///
/// `with_diffusion = false` is the pure-transport hook used by the
/// translation tests. With `u = 0` the result equals [`linear_step`] bit for bit.
pub fn advect_diffuse_mild(
    f: &ScalarField,
    u: &VectorField,
    dt: f64,
    mode: DiffusionMode,
    cfl: f64,
    with_diffusion: bool,
) -> Result<ScalarField> {
    f.check_same_grid(&u.u_r)?;
    let diffusion_mode = if with_diffusion { mode } else { DiffusionMode::ImplicitSplitting };
    check_dt(f, dt, diffusion_mode, cfl)?;
    let speed = u.max_speed();
    let g = f.grid();
    let h = g.h_r().min(g.h_z());
    if speed > 0.0 && dt > cfl * h / speed * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "advective CFL needs dt <= {:.4e}, got {dt:.4e}",
            cfl * h / speed
        )));
    }
    let vel = FaceVelocity::from_cells(u);
    let out = match mode {
        DiffusionMode::Explicit => {
            let f1 = euler(f, &vel, &Limiter::from_reference(f), dt, with_diffusion);
            let f2 = euler(&f1, &vel, &Limiter::from_reference(&f1), dt, with_diffusion);
            average(f, &f2)
        }
        DiffusionMode::ImplicitSplitting => {
            let half = |x: &ScalarField| {
                let x1 = euler(x, &vel, &Limiter::from_reference(x), 0.5 * dt, false);
                let x2 = euler(&x1, &vel, &Limiter::from_reference(&x1), 0.5 * dt, false);
                average(x, &x2)
            };
            let a = half(f);
            let d = if with_diffusion {
                operators::implicit_diffusion(&a, dt)
            } else {
                a
            };
            half(&d)
        }
    };
    if !out.is_finite() {
        return Err(Error::StepRejected {
            t: f64::NAN,
            dt,
            reason: "non-finite field".into(),
        });
    }
    Ok(out)
}

/// `S(t) f` on staged grids: the spacing doubles each time `t` passes a
/// stage end, so long runs stay cheap while the support spreads.
#[derive(Clone, Debug)]
pub struct LinearRun {
    pub t: f64,
    pub f: ScalarField,
    staging: Staging,
    stage: u32,
    mode: DiffusionMode,
    cfl: f64,
}

impl LinearRun {
    /// Samples `f0` on the first stage grid at time `t0`.
    pub fn new<F>(staging: Staging, t0: f64, f0: F, mode: DiffusionMode, cfl: f64) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        if !(cfl > 0.0 && cfl < 1.0) {
            return Err(Error::invalid(format!("cfl must lie in (0, 1), got {cfl}")));
        }
        let grid = staging.grid(0, None)?;
        let f = ScalarField::from_fn(grid, f0);
        let mut stage = 0;
        while t0 >= staging.stage_end(stage) {
            stage += 1;
        }
        let mut run = LinearRun {
            t: t0,
            f,
            staging,
            stage: 0,
            mode,
            cfl,
        };
        while run.stage < stage {
            run.regrid()?;
        }
        Ok(run)
    }

    fn regrid(&mut self) -> Result<()> {
        let g = self.staging.grid(self.stage + 1, Some(self.f.grid()))?;
        self.f = restrict_to(&self.f, &g)?;
        self.stage += 1;
        Ok(())
    }

    fn max_dt(&self) -> f64 {
        match self.mode {
            DiffusionMode::Explicit => self.cfl * operators::diffusion_limit(self.f.grid()),
            DiffusionMode::ImplicitSplitting => (0.02 * self.t).max(operators::diffusion_limit(self.f.grid())),
        }
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        while self.t < t * (1.0 - 1e-13) {
            let end = self.staging.stage_end(self.stage);
            if self.t >= end * (1.0 - 1e-12) {
                self.regrid()?;
                continue;
            }
            let stop = t.min(end);
            let dt = self.max_dt().min(stop - self.t);
            self.f = linear_step(&self.f, dt, self.mode, self.cfl)?;
            self.t += dt;
            if (stop - self.t).abs() <= 1e-13 * stop {
                self.t = stop;
            }
        }
        Ok(())
    }
}

/// `max |grad f|` from centred differences (one-sided at the box edges).
pub fn max_gradient(f: &ScalarField) -> f64 {
    let g = *f.grid();
    let (nr, nz) = (g.n_r(), g.n_z());
    let (hr, hz) = (g.h_r(), g.h_z());
    crate::exec::max_rows(nr, |i| {
        let mut m: f64 = 0.0;
        for j in 0..nz {
            let dr = if i == 0 {
                if g.has_axis() {
                    // Odd reflection across the axis.
                    (f.at(1, j) + f.at(0, j)) / (2.0 * hr)
                } else {
                    (f.at(1, j) - f.at(0, j)) / hr
                }
            } else if i + 1 == nr {
                (f.at(i, j) - f.at(i - 1, j)) / hr
            } else {
                (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * hr)
            };
            let dz = if j == 0 {
                (f.at(i, 1) - f.at(i, 0)) / hz
            } else if j + 1 == nz {
                (f.at(i, j) - f.at(i, j - 1)) / hz
            } else {
                (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * hz)
            };
            m = m.max(dr.hypot(dz));
        }
        m
    })
}
