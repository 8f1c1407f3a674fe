//! Weighted energies of perturbations of the Oseen profile.

use serde::{Deserialize, Serialize};

use crate::domain_fields::{gaussian_weight, lp_norm, ScalarField};
use crate::error::{Error, Result};
use crate::exec;
use crate::selfsim::frame::RescaledFrame;

/// Default truncation radius of the weighted integrals.
pub const DEFAULT_CUTOFF: f64 = 8.0;

/// `(E, calE)` of a perturbation on a rescaled frame, integrated over the
/// disc `|X| <= cutoff`:
/// `E = 1/2 int g^2 w`, `calE = 1/2 int (|grad g|^2 + (1 + |X|^2) g^2) w`.
pub fn perturbation_energies(g: &ScalarField, cutoff: f64) -> Result<(f64, f64)> {
    let grid = *g.grid();
    crate::domain_fields::check_frame_cutoff(&grid, cutoff)?;
    let (n, m) = (grid.n_r(), grid.n_z());
    let (hx, hy) = (grid.h_r(), grid.h_z());
    let c2 = cutoff * cutoff;
    let parts = exec::map_indices(n, |i| {
        let x = grid.r(i);
        let (mut e, mut ce) = (0.0, 0.0);
        for j in 0..m {
            let y = grid.z(j);
            let q = x * x + y * y;
            if q > c2 {
                continue;
            }
            let v = g.at(i, j);
            let gx = if i == 0 {
                (g.at(1, j) - v) / hx
            } else if i + 1 == n {
                (v - g.at(i - 1, j)) / hx
            } else {
                (g.at(i + 1, j) - g.at(i - 1, j)) / (2.0 * hx)
            };
            let gy = if j == 0 {
                (g.at(i, 1) - v) / hy
            } else if j + 1 == m {
                (v - g.at(i, j - 1)) / hy
            } else {
                (g.at(i, j + 1) - g.at(i, j - 1)) / (2.0 * hy)
            };
            let w = gaussian_weight(x, y);
            e += v * v * w;
            ce += (gx * gx + gy * gy + (1.0 + q) * v * v) * w;
        }
        (e, ce)
    });
    let area = grid.cell_area();
    let (e, ce) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((0.5 * e * area, 0.5 * ce * area))
}

fn check_geometry(a: &ScalarField, b: &ScalarField) -> Result<()> {
    if !a.grid().same_as(b.grid()) {
        return Err(Error::invalid("frames have different geometry"));
    }
    Ok(())
}

/// `(E_i, calE_i)` of `f - f_0`.
pub fn energies(frame: &RescaledFrame, f0: &ScalarField) -> Result<(f64, f64)> {
    check_geometry(&frame.f, f0)?;
    perturbation_energies(&frame.f.sub(f0)?, DEFAULT_CUTOFF)
}

/// `(E^Delta_i, calE^Delta_i)` of `f^(1) - f^(2)`; `f_0` cancels and is
/// only checked for geometry.
pub fn difference_energies(frame1: &RescaledFrame, frame2: &RescaledFrame, f0: &ScalarField) -> Result<(f64, f64)> {
    check_geometry(&frame1.f, &frame2.f)?;
    check_geometry(&frame1.f, f0)?;
    if frame1.filament_index != frame2.filament_index || frame1.t != frame2.t {
        return Err(Error::invalid("frames belong to different filaments or times"));
    }
    perturbation_energies(&frame1.f.sub(&frame2.f)?, DEFAULT_CUTOFF)
}

/// `|f - G|_1` over the frame (which is zero outside `1 + epsilon R > 0`).
pub fn oseen_distance(frame: &RescaledFrame) -> f64 {
    lp_norm(&frame.f.sub(&frame.oseen).expect("frame and its reference share a grid"), 1.0)
        .expect("p = 1 is valid")
}

/// Terms of `|f - G|_1 <= sqrt(4 pi) sqrt(2 E) + |f_0 - G|_1 + tail`, where
/// `tail` is the part of `|f - f_0|_1` outside the energy disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bridge {
    pub distance: f64,
    pub energy_term: f64,
    pub background_term: f64,
    pub tail: f64,
}

impl Bridge {
    pub fn bound(&self) -> f64 {
        self.energy_term + self.background_term + self.tail
    }
    pub fn holds(&self) -> bool {
        self.distance <= self.bound() * (1.0 + 1e-12)
    }
}

/// Cauchy-Schwarz bridge between the `L^1` distance to `G` and the energy.
pub fn bridge(frame: &RescaledFrame, f0: &ScalarField, e: f64) -> Result<Bridge> {
    check_geometry(&frame.f, f0)?;
    let g = *f0.grid();
    let c2 = DEFAULT_CUTOFF * DEFAULT_CUTOFF;
    let diff = frame.f.sub(f0)?;
    let tail = exec::sum_rows(g.n_r(), |i| {
        let x = g.r(i);
        diff.row(i)
            .iter()
            .enumerate()
            .filter(|(j, _)| x * x + g.z(*j) * g.z(*j) > c2)
            .map(|(_, v)| v.abs())
            .sum::<f64>()
    }) * g.cell_area();
    Ok(Bridge {
        distance: oseen_distance(frame),
        energy_term: (4.0 * std::f64::consts::PI).sqrt() * (2.0 * e).sqrt(),
        background_term: lp_norm(&f0.sub(&frame.oseen)?, 1.0)?,
        tail,
    })
}

/// Energies of one filament at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilamentEnergy {
    pub e: f64,
    pub cal_e: f64,
    pub l1_dist: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub per_filament: Vec<FilamentEnergy>,
    pub total_e: f64,
    pub total_cal_e: f64,
    pub delta: Option<(f64, f64)>,
}

impl EnergyReport {
    pub fn new(t: f64, per_filament: Vec<FilamentEnergy>) -> Self {
        let total_e = per_filament.iter().map(|p| p.e).sum();
        let total_cal_e = per_filament.iter().map(|p| p.cal_e).sum();
        EnergyReport {
            t,
            per_filament,
            total_e,
            total_cal_e,
            delta: None,
        }
    }

    /// `0 <= E_i <= calE_i` for every filament.
    pub fn is_consistent(&self) -> bool {
        self.per_filament
            .iter()
            .all(|p| p.e >= 0.0 && p.e <= p.cal_e && p.l1_dist >= 0.0)
    }
}
