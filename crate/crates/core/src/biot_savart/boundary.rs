//! Dirichlet data for the stream function on the outer faces of a truncated box.
//!
//! With [`FarField::FreeSpace`] the values are the free-space stream function
//! of the vorticity inside the box, summed from blocks of cells lumped into a
//! monopole and a dipole at the block centre, evaluated on every few boundary faces, then filled
//! in by cubic interpolation along each side.

use serde::{Deserialize, Serialize};

use crate::biot_savart::kernels::ring_stream_with_source_gradient;
use crate::domain_fields::ScalarField;
use crate::exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FarField {
    /// Free-space decay at infinity, imposed through the ring Green's function.
    #[default]
    FreeSpace,
    /// `psi = 0` on the outer faces.
    Homogeneous,
}

const BLOCK: usize = 8;
const SAMPLE_STRIDE: usize = 8;

/// Face values of `psi` on the four sides. `r_lo` is empty when the lower
/// radial face is the axis.
#[derive(Clone, Debug, Default)]
pub struct BoundaryValues {
    pub r_lo: Vec<f64>,
    pub r_hi: Vec<f64>,
    pub z_lo: Vec<f64>,
    pub z_hi: Vec<f64>,
}

impl BoundaryValues {
    pub fn zeros(omega: &ScalarField) -> Self {
        let g = omega.grid();
        BoundaryValues {
            r_lo: if g.has_axis() { vec![] } else { vec![0.0; g.n_z()] },
            r_hi: vec![0.0; g.n_z()],
            z_lo: vec![0.0; g.n_r()],
            z_hi: vec![0.0; g.n_r()],
        }
    }

    pub fn for_field(omega: &ScalarField, far: FarField) -> Self {
        match far {
            FarField::Homogeneous => Self::zeros(omega),
            FarField::FreeSpace => free_space(omega),
        }
    }
}

struct Source {
    gamma: f64,
    r: f64,
    z: f64,
    /// First moments `sum w (r - r_c)` and `sum w (z - z_c)` about the block centre.
    dr: f64,
    dz: f64,
}

/// Block edges `0 = e_0 < ... < e_nb = n`, mirror-symmetric about `n / 2`.
fn block_edges(n: usize) -> Vec<usize> {
    let nb = n.div_ceil(BLOCK);
    (0..=nb)
        .map(|k| if 2 * k <= nb { k * n / nb } else { n - (nb - k) * n / nb })
        .collect()
}

fn lumped_sources(omega: &ScalarField) -> Vec<Source> {
    let g = *omega.grid();
    let area = g.cell_area();
    let (er, ez) = (block_edges(g.n_r()), block_edges(g.n_z()));
    let blocks: Vec<Vec<Source>> = exec::map_indices(er.len() - 1, |bi| {
        let mut out = Vec::new();
        let (i0, i1) = (er[bi], er[bi + 1]);
        let rc = 0.5 * (g.r(i0) + g.r(i1 - 1));
        for bj in 0..ez.len() - 1 {
            let (j0, j1) = (ez[bj], ez[bj + 1]);
            let zc = 0.5 * (g.z(j0) + g.z(j1 - 1));
            let (mut gam, mut abs, mut mr, mut mz) = (0.0, 0.0, 0.0, 0.0);
            for i in i0..i1 {
                for j in j0..j1 {
                    let w = omega.at(i, j) * area;
                    gam += w;
                    abs += w.abs();
                    mr += w * (g.r(i) - rc);
                    mz += w * (g.z(j) - zc);
                }
            }
            if abs == 0.0 {
                continue;
            }
            // Monopole plus dipole about the geometric centre: linear in omega,
            // and accurate to the block quadrupoles.
            out.push(Source { gamma: gam, r: rc, z: zc, dr: mr, dz: mz });
        }
        out
    });
    blocks.into_iter().flatten().collect()
}

fn psi_at(sources: &[Source], r: f64, z: f64) -> f64 {
    sources
        .iter()
        .map(|s| {
            let (psi, d_rs, d_zs) = ring_stream_with_source_gradient(r, z, s.r, s.z);
            s.gamma * psi + s.dr * d_rs + s.dz * d_zs
        })
        .sum()
}

/// Evaluates `f` (a function of the fractional face index) at `m + 1` evenly
/// spaced nodes spanning the side, `m` about `n / SAMPLE_STRIDE`, and fills in
/// the faces with four-point Lagrange cubics. The nodes and stencils are
/// mirror-symmetric, so mirror-symmetric data gives mirror-symmetric values.
fn sampled_side<F: Fn(f64) -> f64 + Sync + Send>(n: usize, f: F) -> Vec<f64> {
    let m = (n.saturating_sub(1)).div_ceil(SAMPLE_STRIDE);
    if m < 3 {
        return (0..n).map(|k| f(k as f64)).collect();
    }
    let span = (n - 1) as f64;
    let node = |k: usize| k as f64 * span / m as f64;
    let vals = exec::map_indices(m + 1, |k| f(node(k)));
    (0..n)
        .map(|k| {
            let seg = ((k * m) / (n - 1)).min(m - 1);
            let base = seg.saturating_sub(1).min(m - 3);
            let xs = [0, 1, 2, 3].map(|a| node(base + a));
            let x = k as f64;
            let mut acc = 0.0;
            for a in 0..4 {
                let mut l = 1.0;
                for b in 0..4 {
                    if a != b {
                        l *= (x - xs[b]) / (xs[a] - xs[b]);
                    }
                }
                acc += l * vals[base + a];
            }
            acc
        })
        .collect()
}

/// Along `z = const` the stream function behaves like `r^2` near the axis, so
/// the smooth quantity `psi / r^2` is what gets interpolated.
fn radial_side<F: Fn(f64) -> f64 + Sync + Send>(g: &crate::domain_fields::Grid, psi: F) -> Vec<f64> {
    let q = sampled_side(g.n_r(), |x| {
        let r = g.r_min() + (x + 0.5) * g.h_r();
        psi(r) / (r * r)
    });
    q.iter().enumerate().map(|(i, v)| v * g.r(i) * g.r(i)).collect()
}

fn free_space(omega: &ScalarField) -> BoundaryValues {
    let g = *omega.grid();
    let sources = lumped_sources(omega);
    if sources.is_empty() {
        return BoundaryValues::zeros(omega);
    }
    let (rmin, rmax, zmin, zmax) = (g.r_min(), g.r_max(), g.z_min(), g.z_max());
    let z_at = |y: f64| zmin + (y + 0.5) * g.h_z();
    BoundaryValues {
        r_lo: if g.has_axis() {
            vec![]
        } else {
            sampled_side(g.n_z(), |y| psi_at(&sources, rmin, z_at(y)))
        },
        r_hi: sampled_side(g.n_z(), |y| psi_at(&sources, rmax, z_at(y))),
        z_lo: radial_side(&g, |r| psi_at(&sources, r, zmin)),
        z_hi: radial_side(&g, |r| psi_at(&sources, r, zmax)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biot_savart::kernels::ring_stream;
    use crate::domain_fields::Grid;

    #[test]
    fn lumped_boundary_matches_cellwise_sum() {
        let g = Grid::new(0.0, 2.0, -1.0, 1.0, 96, 96).unwrap();
        let t = 2e-3;
        let om = ScalarField::from_fn(g, |r, z| {
            (-((r - 1.0).powi(2) + (z - 0.1).powi(2)) / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t)
        });
        let bv = BoundaryValues::for_field(&om, FarField::FreeSpace);
        assert!(bv.r_lo.is_empty());
        let area = g.cell_area();
        let exact = |r: f64, z: f64| -> f64 {
            let mut s = 0.0;
            for i in 0..g.n_r() {
                for j in 0..g.n_z() {
                    let w = om.at(i, j);
                    if w > 1e-300 {
                        s += w * area * ring_stream(r, z, g.r(i), g.z(j));
                    }
                }
            }
            s
        };
        for j in [0, 17, 50, 95] {
            let e = exact(g.r_max(), g.z(j));
            // Lumping leaves the block quadrupoles, ~ (block width / distance)^2 / 12 = 2.3e-3 here.
            assert!((bv.r_hi[j] - e).abs() < 3e-3 * e.abs(), "r_hi[{j}] {} vs {e}", bv.r_hi[j]);
        }
        for i in [0, 1, 33, 95] {
            let e = exact(g.r(i), g.z_min());
            assert!((bv.z_lo[i] - e).abs() < 3e-3 * e.abs() + 1e-14, "z_lo[{i}] {} vs {e}", bv.z_lo[i]);
        }
    }

    #[test]
    fn cubic_fill_is_exact_for_cubics() {
        let f = |x: f64| {
            1.0 + 0.5 * x - 0.01 * x * x + 1e-4 * x * x * x
        };
        let v = sampled_side(37, f);
        for (k, val) in v.iter().enumerate() {
            assert!((val - f(k as f64)).abs() < 1e-10);
        }
    }
}
