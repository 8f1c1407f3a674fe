use serde::{Deserialize, Serialize};

use crate::biot_savart::boundary::{BoundaryValues, FarField};
use crate::biot_savart::multigrid::StreamSolver;
use crate::domain_fields::{Geometry, Grid, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::exec;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Stokes stream function together with the face values it was solved with.
#[derive(Clone, Debug)]
pub struct StreamFunction {
    pub psi: ScalarField,
    pub boundary: BoundaryValues,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BsSolveReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub divergence_max: f64,
    pub used_cg: bool,
}

/// Velocity recovery on a fixed grid. Keeps the multigrid hierarchy and the
/// previous stream function as a warm start between calls.
#[derive(Clone, Debug)]
pub struct BiotSavart {
    solver: StreamSolver,
    far: FarField,
    tol: f64,
    warm: Option<Vec<f64>>,
}

impl BiotSavart {
    pub fn new(grid: &Grid, far: FarField, tol: f64) -> Result<Self> {
        if grid.geometry() != Geometry::HalfPlane {
            return Err(Error::invalid("Biot-Savart needs a half-plane grid"));
        }
        if !(tol > 0.0 && tol <= 1e-4) {
            return Err(Error::invalid(format!("solver tolerance must lie in (0, 1e-4], got {tol}")));
        }
        Ok(BiotSavart {
            solver: StreamSolver::new(grid),
            far,
            tol,
            warm: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.solver.grid()
    }

    pub fn far_field(&self) -> FarField {
        self.far
    }

    pub fn forget_warm_start(&mut self) {
        self.warm = None;
    }

    pub fn stream_function(&mut self, omega: &ScalarField) -> Result<(StreamFunction, BsSolveReport)> {
        let g = *self.grid();
        if !omega.grid().same_as(&g) {
            return Err(Error::invalid("vorticity grid differs from the solver grid"));
        }
        if !omega.is_finite() {
            return Err(Error::invalid("vorticity contains non-finite values"));
        }
        let bv = BoundaryValues::for_field(omega, self.far);
        let b = rhs_with_boundary(omega, &bv, self.solver.fine_conductances());
        let omega_norm = exec::sum_rows(g.n_r(), |i| {
            let r = g.r(i);
            omega.row(i).iter().map(|w| (r * w) * (r * w)).sum::<f64>()
        })
        .sqrt();
        let mut report = BsSolveReport::default();
        let mut x = vec![0.0; g.len()];
        if omega_norm > 0.0 {
            if let Some(w) = &self.warm {
                x.copy_from_slice(w);
            }
            let stats = self.solver.solve(&mut x, &b, omega_norm, self.tol)?;
            report.iterations = stats.iterations;
            report.final_residual = stats.final_residual;
            report.used_cg = stats.used_cg;
            self.warm = Some(x.clone());
        }
        let psi = ScalarField::from_values(g, x)?;
        Ok((StreamFunction { psi, boundary: bv }, report))
    }

    pub fn solve(&mut self, omega: &ScalarField) -> Result<(VectorField, BsSolveReport)> {
        let (sf, mut report) = self.stream_function(omega)?;
        let u = velocity_from_stream(&sf);
        report.divergence_max = u.divergence_max();
        Ok((u, report))
    }
}

/// Face conductances of the fine level that multiply boundary data.
pub(crate) struct BoundaryConductances {
    pub r_lo: f64,
    pub r_hi: f64,
    /// Per row: conductance of the two axial boundary faces.
    pub z_b: Vec<f64>,
}

impl StreamSolver {
    pub(crate) fn fine_conductances(&self) -> BoundaryConductances {
        let g = self.grid();
        let hr = g.h_r();
        let hz = g.h_z();
        BoundaryConductances {
            r_lo: if g.has_axis() { 0.0 } else { 2.0 / (g.r_min() * hr * hr) },
            r_hi: 2.0 / (g.r_max() * hr * hr),
            z_b: (0..g.n_r()).map(|i| 2.0 / (g.r(i) * hz * hz)).collect(),
        }
    }
}

fn rhs_with_boundary(omega: &ScalarField, bv: &BoundaryValues, c: BoundaryConductances) -> Vec<f64> {
    let g = *omega.grid();
    let (nr, nz) = (g.n_r(), g.n_z());
    let mut b = omega.values().to_vec();
    for j in 0..nz {
        if !bv.r_lo.is_empty() {
            b[j] += c.r_lo * bv.r_lo[j];
        }
        b[(nr - 1) * nz + j] += c.r_hi * bv.r_hi[j];
    }
    for i in 0..nr {
        b[i * nz] += c.z_b[i] * bv.z_lo[i];
        b[i * nz + nz - 1] += c.z_b[i] * bv.z_hi[i];
    }
    b
}

/// `u^r = -d_z psi / r`, `u^z = d_r psi / r` by centred differences. Ghost
/// values extrapolate linearly through the Dirichlet face values. Next to the
/// axis `u^z` comes from the even expansion `psi = a r^2 + b r^4` fitted to the
/// first two cells, which also keeps `u^r(0, z) = 0`.
pub fn velocity_from_stream(sf: &StreamFunction) -> VectorField {
    let psi = &sf.psi;
    let bv = &sf.boundary;
    let g = *psi.grid();
    let (nr, nz) = (g.n_r(), g.n_z());
    let (hr, hz) = (g.h_r(), g.h_z());
    let mut ur = vec![0.0; g.len()];
    let mut uz = vec![0.0; g.len()];
    exec::for_each_row2(&mut ur, &mut uz, nz, |i, rur, ruz| {
        let r = g.r(i);
        for j in 0..nz {
            let p = psi.at(i, j);
            let below = if j > 0 { psi.at(i, j - 1) } else { 2.0 * bv.z_lo[i] - p };
            let above = if j + 1 < nz { psi.at(i, j + 1) } else { 2.0 * bv.z_hi[i] - p };
            rur[j] = -(above - below) / (2.0 * hz * r);
            let outer = if i + 1 < nr { psi.at(i + 1, j) } else { 2.0 * bv.r_hi[j] - p };
            ruz[j] = if i == 0 && g.has_axis() {
                if nr > 1 {
                    (63.0 * p + psi.at(1, j)) / (9.0 * hr * hr)
                } else {
                    8.0 * p / (hr * hr)
                }
            } else {
                let inner = if i > 0 { psi.at(i - 1, j) } else { 2.0 * bv.r_lo[j] - p };
                (outer - inner) / (2.0 * hr * r)
            };
        }
    });
    VectorField {
        u_r: ScalarField::from_raw(g, ur),
        u_z: ScalarField::from_raw(g, uz),
    }
}

/// One-shot velocity recovery with free-space far-field data.
pub fn solve_velocity(omega: &ScalarField, tol: f64) -> Result<(VectorField, BsSolveReport)> {
    solve_velocity_with(omega, tol, FarField::FreeSpace)
}

pub fn solve_velocity_with(omega: &ScalarField, tol: f64, far: FarField) -> Result<(VectorField, BsSolveReport)> {
    BiotSavart::new(omega.grid(), far, tol)?.solve(omega)
}

/// `|u|_inf / (|omega|_1^(1/2) |omega|_inf^(1/2))`.
pub fn interpolation_bound_check(omega: &ScalarField) -> Result<f64> {
    let l1 = crate::domain_fields::lp_norm(omega, 1.0)?;
    let linf = omega.max_abs();
    if l1 == 0.0 || linf == 0.0 {
        return Err(Error::invalid("interpolation ratio is undefined for a zero field"));
    }
    let (u, _) = solve_velocity(omega, DEFAULT_TOL)?;
    Ok(u.max_speed() / (l1.sqrt() * linf.sqrt()))
}
