//! Cross-check of the elliptic velocity against direct quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::biot_savart::direct_quadrature_velocity;
use crate::domain_fields::{ScalarField, VectorField};
use crate::dynamics::SimulationState;
use crate::error::{Error, Result};
use crate::harness::config::RunConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsSample {
    pub point: (f64, f64),
    pub solve: (f64, f64),
    pub quad: (f64, f64),
    /// `|u_solve - u_quad|` over the largest quadrature speed of the sample.
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsVerification {
    pub samples: Vec<BsSample>,
    pub max_rel_err: f64,
    /// Same points on the grid with half the spacing.
    pub refined_max_rel_err: f64,
    /// `log2(max_rel_err / refined_max_rel_err)`.
    pub observed_order: f64,
}

/// Bilinear interpolation of cell-centred values, clamped to the outer
/// centres.
pub fn bilinear(f: &ScalarField, r: f64, z: f64) -> f64 {
    let g = f.grid();
    let x = ((r - g.r_min()) / g.h_r() - 0.5).clamp(0.0, (g.n_r() - 1) as f64);
    let y = ((z - g.z_min()) / g.h_z() - 0.5).clamp(0.0, (g.n_z() - 1) as f64);
    let (i, j) = ((x.floor() as usize).min(g.n_r() - 2), (y.floor() as usize).min(g.n_z() - 2));
    let (a, b) = (x - i as f64, y - j as f64);
    (1.0 - a) * ((1.0 - b) * f.at(i, j) + b * f.at(i, j + 1)) + a * ((1.0 - b) * f.at(i + 1, j) + b * f.at(i + 1, j + 1))
}

/// `k` points drawn uniformly from the discs `|x - x_i| <= 3 sqrt(t)`, with
/// the filament chosen uniformly.
pub fn sample_points(cfg: &RunConfig, t: f64, k: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fil = cfg.filaments.filaments();
    let rad = 3.0 * t.sqrt();
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let f = fil[rng.gen_range(0..fil.len())];
        let (x, y): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if x * x + y * y > 1.0 {
            continue;
        }
        let (r, z) = (f.r + rad * x, f.z + rad * y);
        if r > 0.0 {
            out.push((r, z));
        }
    }
    out
}

fn compare(omega: &ScalarField, u: &VectorField, points: &[(f64, f64)]) -> Result<Vec<BsSample>> {
    let quad = direct_quadrature_velocity(omega, points)?;
    let scale = quad.iter().map(|q| q.0.hypot(q.1)).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::invalid("reference velocity vanishes at every sample point"));
    }
    Ok(points
        .iter()
        .zip(&quad)
        .map(|(&(r, z), &q)| {
            let s = (bilinear(&u.u_r, r, z), bilinear(&u.u_z, r, z));
            BsSample {
                point: (r, z),
                solve: s,
                quad: q,
                rel_err: (s.0 - q.0).hypot(s.1 - q.1) / scale,
            }
        })
        .collect())
}

/// Initial vorticity of `cfg` at `t_start` on its default grid and on the
/// refined grid; velocities from the stream-function solve against direct
/// quadrature at `k` seeded random points.
pub fn verify_bs(cfg: &RunConfig, k: usize, seed: u64) -> Result<BsVerification> {
    if k == 0 {
        return Err(Error::invalid("need at least one sample point"));
    }
    let t = cfg.solver.t_start;
    let points = sample_points(cfg, t, k, seed);
    let coarse = SimulationState::initialize_filaments(&cfg.filaments, t, &cfg.solver)?;
    let samples = compare(&coarse.omega_total, &coarse.velocity, &points)?;
    let fine = SimulationState::initialize_on_grid(&cfg.filaments, t, coarse.grid().refined(), &cfg.solver)?;
    let refined = compare(&fine.omega_total, &fine.velocity, &points)?;
    let max = |s: &[BsSample]| s.iter().map(|x| x.rel_err).fold(0.0, f64::max);
    let (e1, e2) = (max(&samples), max(&refined));
    Ok(BsVerification {
        samples,
        max_rel_err: e1,
        refined_max_rel_err: e2,
        observed_order: (e1 / e2).log2(),
    })
}
