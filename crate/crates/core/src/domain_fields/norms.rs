use std::f64::consts::PI;

use crate::domain_fields::{Geometry, Grid, ScalarField};
use crate::error::{Error, Result};
use crate::exec;

/// Midpoint-rule `(int |f|^p dr dz)^(1/p)`; `p = f64::INFINITY` gives `max |f|`.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("lp_norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let g = *f.grid();
    let s = exec::sum_rows(g.n_r(), |i| {
        let row = f.row(i);
        if p == 1.0 {
            row.iter().map(|v| v.abs()).sum::<f64>()
        } else if p == 2.0 {
            row.iter().map(|v| v * v).sum::<f64>()
        } else {
            row.iter().map(|v| v.abs().powf(p)).sum::<f64>()
        }
    });
    Ok((s * g.cell_area()).powf(1.0 / p))
}

/// Midpoint-rule signed integral `int f dr dz`.
pub fn integral(f: &ScalarField) -> f64 {
    let g = *f.grid();
    exec::sum_rows(g.n_r(), |i| f.row(i).iter().sum::<f64>()) * g.cell_area()
}

/// Oseen vortex `G(X) = exp(-|X|^2/4) / (4 pi)`.
#[inline]
pub fn oseen(rr: f64, zz: f64) -> f64 {
    (-(rr * rr + zz * zz) / 4.0).exp() / (4.0 * PI)
}

/// Gaussian weight `w(X) = exp(|X|^2/4)`.
#[inline]
pub fn gaussian_weight(rr: f64, zz: f64) -> f64 {
    ((rr * rr + zz * zz) / 4.0).exp()
}

/// `G` sampled on the square frame `[-extent, extent]^2`.
pub fn oseen_profile(frame_extent: f64, resolution: usize) -> Result<ScalarField> {
    let g = Grid::frame(frame_extent, resolution)?;
    Ok(ScalarField::from_fn(g, oseen))
}

pub(crate) fn frame_extent(g: &Grid) -> f64 {
    g.r_max().min(-g.r_min()).min(g.z_max()).min(-g.z_min())
}

pub(crate) fn check_frame_cutoff(g: &Grid, cutoff: f64) -> Result<()> {
    if g.geometry() != Geometry::Plane {
        return Err(Error::invalid("weighted integrals need a rescaled-frame field"));
    }
    if !(cutoff > 0.0) || cutoff > frame_extent(g) {
        return Err(Error::invalid(format!(
            "cutoff radius {cutoff} must lie in (0, frame extent {}]",
            frame_extent(g)
        )));
    }
    Ok(())
}

/// `(int_{|X| <= cutoff} f^2 w dX)^(1/2)` on a rescaled frame. Cells count when
/// their centre lies inside the disc.
pub fn weighted_l2(f: &ScalarField, cutoff_radius: f64) -> Result<f64> {
    let g = *f.grid();
    check_frame_cutoff(&g, cutoff_radius)?;
    let c2 = cutoff_radius * cutoff_radius;
    let s = exec::sum_rows(g.n_r(), |i| {
        let x = g.r(i);
        let mut acc = 0.0;
        for (j, v) in f.row(i).iter().enumerate() {
            let y = g.z(j);
            if x * x + y * y <= c2 {
                acc += v * v * gaussian_weight(x, y);
            }
        }
        acc
    });
    Ok((s * g.cell_area()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_norms_vanish() {
        let g = Grid::new(0.0, 1.0, -1.0, 1.0, 16, 16).unwrap();
        let f = ScalarField::zeros(g);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm(&f, p).unwrap(), 0.0);
        }
        assert!(lp_norm(&f, 0.5).is_err());
        let fr = ScalarField::zeros(Grid::frame(10.0, 32).unwrap());
        assert_eq!(weighted_l2(&fr, 8.0).unwrap(), 0.0);
    }

    #[test]
    fn single_cell_quadrature() {
        let g = Grid::new(0.0, 1.0, -1.0, 1.0, 16, 20).unwrap();
        let mut f = ScalarField::zeros(g);
        f.set(3, 7, 2.5);
        assert!((lp_norm(&f, 1.0).unwrap() - 2.5 * g.h_r() * g.h_z()).abs() < 1e-16);
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 2.5);
    }

    #[test]
    fn weighted_l2_rejects_physical_fields_and_large_cutoffs() {
        let g = Grid::new(0.0, 1.0, -1.0, 1.0, 16, 16).unwrap();
        assert!(weighted_l2(&ScalarField::zeros(g), 0.5).is_err());
        let fr = ScalarField::zeros(Grid::frame(6.0, 32).unwrap());
        assert!(weighted_l2(&fr, 6.5).is_err());
        assert!(weighted_l2(&fr, 6.0).is_ok());
    }

    #[test]
    fn oseen_profile_peak_and_symmetry() {
        let f = oseen_profile(10.0, 128).unwrap();
        let g = *f.grid();
        assert_eq!(oseen(0.0, 0.0), 1.0 / (4.0 * PI));
        for i in 0..128 {
            for j in 0..128 {
                let v = f.at(i, j);
                assert_eq!(v, f.at(127 - i, j));
                assert_eq!(v, f.at(i, 127 - j));
                assert_eq!(v, f.at(j, i));
            }
        }
        assert_eq!(g.geometry(), Geometry::Plane);
    }
}
