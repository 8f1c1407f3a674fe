//! Grid stages. A run starts on a box of half-width `margin * sqrt(t_stage_end)`
//! around the data with spacing `h = sqrt(t_start) / k`. Whenever `t` reaches
//! four times the stage start, the grid is replaced by one with twice the
//! spacing and a correspondingly larger box. Box edges are kept on multiples of
//! `2h`, so every coarse cell is the union of four fine cells.

use crate::domain_fields::{Grid, ScalarField};
use crate::error::{Error, Result};

/// Multigrid wants several levels; cell counts are rounded up to this.
const CELL_MULTIPLE: usize = 16;

/// Axis-aligned box `[r_lo, r_hi] x [z_lo, z_hi]` holding the data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoreBox {
    pub r_lo: f64,
    pub r_hi: f64,
    pub z_lo: f64,
    pub z_hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Staging {
    pub core: CoreBox,
    pub h0: f64,
    pub k: f64,
    pub margin: f64,
    pub t_end: f64,
    pub enabled: bool,
}

impl Staging {
    pub fn h(&self, stage: u32) -> f64 {
        self.h0 * f64::powi(2.0, stage as i32)
    }

    /// Time at which `stage` hands over to the next one.
    pub fn stage_end(&self, stage: u32) -> f64 {
        if !self.enabled {
            return f64::INFINITY;
        }
        let s = 2.0 * self.k * self.h(stage);
        s * s
    }

    fn reach(&self, stage: u32) -> f64 {
        self.margin * self.stage_end(stage).min(self.t_end).sqrt()
    }

    /// Grid for `stage`, containing `previous` when given.
    pub fn grid(&self, stage: u32, previous: Option<&Grid>) -> Result<Grid> {
        let h = self.h(stage);
        let reach = self.reach(stage);
        let c = &self.core;
        let (mut r_lo, mut r_hi) = ((c.r_lo - reach).max(0.0), c.r_hi + reach);
        let (mut z_lo, mut z_hi) = (c.z_lo - reach, c.z_hi + reach);
        if let Some(p) = previous {
            r_lo = r_lo.min(p.r_min());
            r_hi = r_hi.max(p.r_max());
            z_lo = z_lo.min(p.z_min());
            z_hi = z_hi.max(p.z_max());
        }
        let two_h = 2.0 * h;
        let r_lo = ((r_lo / two_h) + 1e-9).floor().max(0.0) * two_h;
        let kz_lo = ((z_lo / two_h) + 1e-9).floor();
        let kz_hi = ((z_hi / two_h) - 1e-9).ceil();
        let mut n_r = (((r_hi - r_lo) / h) - 1e-9).ceil() as usize;
        n_r = n_r.div_ceil(CELL_MULTIPLE) * CELL_MULTIPLE;
        let (mut a, mut b) = (kz_lo as i64, kz_hi as i64);
        // Grow by one 2h step on alternating sides until the count fits.
        let mut toggle = false;
        while (2 * (b - a)) as usize % CELL_MULTIPLE != 0 {
            if toggle {
                a -= 1;
            } else {
                b += 1;
            }
            toggle = !toggle;
        }
        let n_z = (2 * (b - a)) as usize;
        let g = Grid::new(
            r_lo,
            r_lo + n_r as f64 * h,
            a as f64 * two_h,
            b as f64 * two_h,
            n_r,
            n_z,
        )?;
        Ok(g)
    }
}

/// Index offset `(edge_fine - edge_coarse) / h_fine`, which must be integral.
fn lattice_offset(fine_edge: f64, coarse_edge: f64, h_fine: f64) -> Result<i64> {
    let x = (fine_edge - coarse_edge) / h_fine;
    let k = x.round();
    if (x - k).abs() > 1e-6 {
        return Err(Error::invalid("grids are not aligned on a common lattice"));
    }
    Ok(k as i64)
}

/// Mass-conserving transfer of `f` onto `coarse`, which has exactly twice the
/// spacing of `f`'s grid and contains it. Each direction uses the fourth-order
/// midpoint filter `(-1, 9, 9, -1) / 16`; cells outside the old box are zero
/// and the axis is an odd reflection.
pub fn restrict_to(f: &ScalarField, coarse: &Grid) -> Result<ScalarField> {
    let fg = *f.grid();
    let ratio_r = coarse.h_r() / fg.h_r();
    let ratio_z = coarse.h_z() / fg.h_z();
    if (ratio_r - 2.0).abs() > 1e-9 || (ratio_z - 2.0).abs() > 1e-9 {
        return Err(Error::invalid("restriction needs a coarse grid with exactly twice the spacing"));
    }
    let off_r = lattice_offset(fg.r_min(), coarse.r_min(), fg.h_r())?;
    let off_z = lattice_offset(fg.z_min(), coarse.z_min(), fg.h_z())?;
    if off_r < 0 || off_z < 0 {
        return Err(Error::invalid("coarse grid must contain the fine grid"));
    }
    let (fnr, fnz) = (fg.n_r() as i64, fg.n_z() as i64);
    let axis = fg.has_axis();
    // Fine value at fine-lattice index (a, b) measured from the coarse origin.
    let fine = |a: i64, b: i64| -> f64 {
        let (mut i, j) = (a - off_r, b - off_z);
        let mut sign = 1.0;
        if i == -1 && axis {
            i = 0;
            sign = -1.0;
        }
        if i < 0 || i >= fnr || j < 0 || j >= fnz {
            return 0.0;
        }
        sign * f.at(i as usize, j as usize)
    };
    const W: [f64; 4] = [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0];
    let out = ScalarField::from_fn(*coarse, |_, _| 0.0);
    let mut vals = out.into_values();
    let cnz = coarse.n_z();
    crate::exec::for_each_row(&mut vals, cnz, |ci, row| {
        let a0 = 2 * ci as i64 - 1;
        // Skip coarse rows whose stencil misses the fine box entirely.
        if a0 + 3 < off_r - 1 || a0 > off_r + fnr {
            return;
        }
        for (cj, v) in row.iter_mut().enumerate() {
            let b0 = 2 * cj as i64 - 1;
            if b0 + 3 < off_z || b0 > off_z + fnz {
                continue;
            }
            let mut acc = 0.0;
            for (p, wp) in W.iter().enumerate() {
                let mut line = 0.0;
                for (q, wq) in W.iter().enumerate() {
                    line += wq * fine(a0 + p as i64, b0 + q as i64);
                }
                acc += wp * line;
            }
            *v = acc;
        }
    });
    ScalarField::from_values(*coarse, vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_fields::integral;

    fn staging() -> Staging {
        Staging {
            core: CoreBox { r_lo: 1.0, r_hi: 1.0, z_lo: 0.0, z_hi: 0.0 },
            h0: 1e-2 / 4.0,
            k: 4.0,
            margin: 12.0,
            t_end: 1e-2,
            enabled: true,
        }
    }

    #[test]
    fn stage_grids_nest_and_align() {
        let s = staging();
        let g0 = s.grid(0, None).unwrap();
        assert!((s.stage_end(0) - 4e-4).abs() < 1e-15);
        let g1 = s.grid(1, Some(&g0)).unwrap();
        assert!((g1.h_r() - 2.0 * g0.h_r()).abs() < 1e-15);
        assert!(g1.r_min() <= g0.r_min() && g1.r_max() >= g0.r_max());
        assert!(g1.z_min() <= g0.z_min() && g1.z_max() >= g0.z_max());
        assert_eq!(g0.n_r() % 16, 0);
        assert_eq!(g1.n_z() % 16, 0);
        // Box covers the margin and is mirror-symmetric in z for a centred core.
        assert!(g0.r_max() >= 1.0 + 12.0 * 0.02 - 1e-12);
        assert!((g0.z_min() + g0.z_max()).abs() < 1e-12);
    }

    #[test]
    fn restriction_conserves_mass_and_is_fourth_order_at_centres() {
        let fine = Grid::new(0.0, 2.0, -1.0, 1.0, 64, 64).unwrap();
        let coarse = Grid::new(0.0, 3.0, -1.5, 1.5, 48, 48).unwrap();
        // Negligible at the axis, where the odd reflection moves mass.
        let prof = |r: f64, z: f64| r * (-((r - 1.0).powi(2) + z * z) * 60.0).exp();
        let f = ScalarField::from_fn(fine, prof);
        let c = restrict_to(&f, &coarse).unwrap();
        assert!((integral(&c) - integral(&f)).abs() < 1e-13 * integral(&f));
        let exact = ScalarField::from_fn(coarse, prof);
        let err = c.sub(&exact).unwrap().max_abs();
        assert!(err < 2e-3 * exact.max_abs(), "{err}");
    }

    #[test]
    fn restriction_rejects_misaligned_grids() {
        let fine = Grid::new(0.0, 2.0, -1.0, 1.0, 64, 64).unwrap();
        let bad = Grid::new(0.0, 3.0, -1.51, 1.49, 48, 48).unwrap();
        assert!(restrict_to(&ScalarField::zeros(fine), &bad).is_err());
    }
}
