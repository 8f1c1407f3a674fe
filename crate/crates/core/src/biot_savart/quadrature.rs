//! Direct summation of the circular-filament kernel over all cells. O(N) per
//! evaluation point and meant for tests and verification only.
//!
//! Vorticity is taken constant on each cell. On cells close to the evaluation
//! point the kernel is split into the planar point-vortex part, integrated
//! exactly over the rectangle, and a logarithmically singular remainder
//! integrated on a sub-cell lattice.

use std::f64::consts::PI;

use crate::biot_savart::kernels::ring_velocity;
use crate::domain_fields::ScalarField;
use crate::error::{Error, Result};
use crate::exec;

const NEAR_CELLS: isize = 2;
const SUB: usize = 8;

/// Antiderivative of `X / (X^2 + Y^2)` in both variables, dropping the
/// `-Y` term that cancels over a rectangle.
fn prim(x: f64, y: f64) -> f64 {
    let rho2 = x * x + y * y;
    let log_part = if rho2 > 0.0 { 0.5 * y * rho2.ln() } else { 0.0 };
    let atan_part = if x != 0.0 { x * (y / x).atan() } else { 0.0 };
    log_part + atan_part
}

fn rect(x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    prim(x2, y2) - prim(x1, y2) - prim(x2, y1) + prim(x1, y1)
}

/// Planar point-vortex velocity `(u^r, u^z)` at `(r, z)` induced by unit
/// vorticity on `[r1, r2] x [z1, z2]`.
fn planar_cell(r: f64, z: f64, r1: f64, r2: f64, z1: f64, z2: f64) -> (f64, f64) {
    let ur = -rect(z1 - z, z2 - z, r1 - r, r2 - r) / (2.0 * PI);
    let uz = rect(r1 - r, r2 - r, z1 - z, z2 - z) / (2.0 * PI);
    (ur, uz)
}

fn planar_point(r: f64, z: f64, rs: f64, zs: f64) -> (f64, f64) {
    let (dr, dz) = (r - rs, z - zs);
    let q = dr * dr + dz * dz;
    (dz / (2.0 * PI * q), -dr / (2.0 * PI * q))
}

pub fn direct_quadrature_velocity(omega: &ScalarField, points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let g = *omega.grid();
    for &(r, z) in points {
        let inside = r > g.r_min() && r < g.r_max() && z > g.z_min() && z < g.z_max() && r > 0.0;
        if !inside {
            return Err(Error::invalid(format!("point ({r}, {z}) is not strictly inside the grid")));
        }
    }
    let (hr, hz) = (g.h_r(), g.h_z());
    let area = hr * hz;
    Ok(exec::map_indices(points.len(), |p| {
        let (r, z) = points[p];
        let (pi, pj) = g.locate(r, z).expect("checked above");
        let (mut ur, mut uz) = (0.0, 0.0);
        for i in 0..g.n_r() {
            for j in 0..g.n_z() {
                let w = omega.at(i, j);
                if w == 0.0 {
                    continue;
                }
                let near = (i as isize - pi as isize).abs() <= NEAR_CELLS
                    && (j as isize - pj as isize).abs() <= NEAR_CELLS;
                if !near {
                    let (a, b) = ring_velocity(r, z, g.r(i), g.z(j));
                    ur += w * area * a;
                    uz += w * area * b;
                    continue;
                }
                let (r1, z1) = (g.r(i) - 0.5 * hr, g.z(j) - 0.5 * hz);
                let (a, b) = planar_cell(r, z, r1, r1 + hr, z1, z1 + hz);
                ur += w * a;
                uz += w * b;
                let sub_area = area / (SUB * SUB) as f64;
                for a_ in 0..SUB {
                    let rs = r1 + (a_ as f64 + 0.5) * hr / SUB as f64;
                    for b_ in 0..SUB {
                        let zs = z1 + (b_ as f64 + 0.5) * hz / SUB as f64;
                        let q = (r - rs).hypot(z - zs);
                        if q < 1e-12 * (hr + hz) {
                            continue;
                        }
                        let (kr, kz) = ring_velocity(r, z, rs, zs);
                        let (pr, pz) = planar_point(r, z, rs, zs);
                        ur += w * sub_area * (kr - pr);
                        uz += w * sub_area * (kz - pz);
                    }
                }
            }
        }
        (ur, uz)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_fields::Grid;

    #[test]
    fn zero_field_gives_zero_velocity() {
        let g = Grid::new(0.0, 2.0, -1.0, 1.0, 16, 16).unwrap();
        let v = direct_quadrature_velocity(&ScalarField::zeros(g), &[(1.0, 0.0), (0.5, 0.3)]).unwrap();
        assert!(v.iter().all(|&(a, b)| a == 0.0 && b == 0.0));
        assert!(direct_quadrature_velocity(&ScalarField::zeros(g), &[(2.5, 0.0)]).is_err());
    }

    #[test]
    fn planar_rectangle_matches_subdivided_sum() {
        let (r, z) = (1.03, -0.41);
        let (r1, r2, z1, z2) = (1.2, 1.3, -0.2, -0.05);
        let exact = planar_cell(r, z, r1, r2, z1, z2);
        let n = 400;
        let (mut a, mut b) = (0.0, 0.0);
        let (dr, dz) = ((r2 - r1) / n as f64, (z2 - z1) / n as f64);
        for i in 0..n {
            for j in 0..n {
                let (x, y) = planar_point(r, z, r1 + (i as f64 + 0.5) * dr, z1 + (j as f64 + 0.5) * dz);
                a += x * dr * dz;
                b += y * dr * dz;
            }
        }
        assert!((a - exact.0).abs() < 1e-6 * exact.0.abs());
        assert!((b - exact.1).abs() < 1e-6 * exact.1.abs());
    }

    #[test]
    fn unit_cell_on_axis_matches_classical_formula() {
        // One cell of unit circulation at (1, 0); u^z on the axis from the
        // filament formula rs^2 / (2 (rs^2 + z^2)^(3/2)).
        let g = Grid::new(0.0, 2.0, -1.0, 1.0, 80, 80).unwrap();
        let mut om = ScalarField::zeros(g);
        let (i, j) = g.locate(1.0 + 1e-9, 1e-9).unwrap();
        om.set(i, j, 1.0 / g.cell_area());
        let (rs, zs) = (g.r(i), g.z(j));
        for &zp in &[0.0, 0.35, -0.6] {
            let rp = 0.5 * g.h_r();
            let v = direct_quadrature_velocity(&om, &[(rp, zp)]).unwrap()[0];
            let exact = rs * rs / (2.0 * (rs * rs + (zp - zs).powi(2)).powf(1.5));
            assert!((v.1 - exact).abs() < 0.01 * exact, "z = {zp}: {} vs {exact}", v.1);
        }
    }
}
