use serde::{Deserialize, Serialize};

use crate::biot_savart::FarField;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionMode {
    /// Diffusion folded into the SSP-RK2 stages.
    #[default]
    Explicit,
    /// Strang splitting: half advection, implicit LOD diffusion, half advection.
    ImplicitSplitting,
}

/// Time-integration and discretisation settings for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    pub t_start: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub diffusion_mode: DiffusionMode,
    pub bs_tol: f64,
    pub far_field: FarField,
    /// Cells per `sqrt(t)` when a grid stage starts: `h = sqrt(t_stage) / k`.
    pub cells_per_sqrt_t: f64,
    /// Half-width of the box around the data, in units of `sqrt(t_stage_end)`.
    pub domain_margin: f64,
    /// Coarsen the grid by two (and enlarge the box) each time `t` grows by four.
    pub regrid: bool,
    /// Upper bound on `dt / t` in implicit-splitting mode.
    pub implicit_max_dt_over_t: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            t_start: 2.5e-5,
            t_end: 1e-2,
            cfl_safety: 0.4,
            diffusion_mode: DiffusionMode::Explicit,
            bs_tol: 1e-10,
            far_field: FarField::FreeSpace,
            cells_per_sqrt_t: 4.0,
            domain_margin: 12.0,
            regrid: true,
            implicit_max_dt_over_t: 0.02,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_start > 0.0) || !(self.t_end > self.t_start) || !self.t_end.is_finite() {
            return Err(Error::invalid(format!(
                "need 0 < t_start < t_end, got {} and {}",
                self.t_start, self.t_end
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::invalid(format!("cfl_safety must lie in (0, 1), got {}", self.cfl_safety)));
        }
        if !(self.bs_tol > 0.0 && self.bs_tol <= 1e-4) {
            return Err(Error::invalid(format!("bs_tol must lie in (0, 1e-4], got {}", self.bs_tol)));
        }
        if !(self.cells_per_sqrt_t >= 2.0) {
            return Err(Error::invalid(format!(
                "cells_per_sqrt_t must be at least 2 so that sqrt(4 t0) >= 4 h, got {}",
                self.cells_per_sqrt_t
            )));
        }
        if !(self.domain_margin >= 4.0) {
            return Err(Error::invalid(format!("domain_margin must be at least 4, got {}", self.domain_margin)));
        }
        if !(self.implicit_max_dt_over_t > 0.0 && self.implicit_max_dt_over_t <= 0.5) {
            return Err(Error::invalid("implicit_max_dt_over_t must lie in (0, 0.5]"));
        }
        Ok(())
    }
}
