//! Flux-form discretisation of
//! `d_t f + d_r(u^r f) + d_z(u^z f) = d_r((1/r) d_r(r f)) + d_z^2 f`.
//!
//! Because `d_r u^r + u^r/r + d_z u^z = 0`, the advective part equals
//! `u . grad f - (u^r/r) f`, so vortex stretching is carried by the flux form.
//! Every outer face is a homogeneous Dirichlet face for `f`; on the axis the
//! diffusive flux is `(1/r) d_r(r f)|_{r=0} = 4 f_0 / h_r`, exact for `f ~ r`.
//! Mass changes only through boundary fluxes.

use crate::domain_fields::{Grid, ScalarField, VectorField};
use crate::exec;

/// `out = L f`.
pub fn diffusion(f: &ScalarField, out: &mut [f64]) {
    let g = *f.grid();
    let (nr, nz) = (g.n_r(), g.n_z());
    let (hr, hz) = (g.h_r(), g.h_z());
    let v = f.values();
    let axis = g.has_axis();
    exec::for_each_row(out, nz, |i, row| {
        let r = g.r(i);
        let base = i * nz;
        for (j, o) in row.iter_mut().enumerate() {
            let k = base + j;
            let fc = v[k];
            let up = if i + 1 < nr {
                let rp = g.r(i + 1);
                (rp * v[k + nz] - r * fc) / (hr * g.r_face(i + 1))
            } else {
                -2.0 * r * fc / (hr * g.r_max())
            };
            let down = if i > 0 {
                let rm = g.r(i - 1);
                (r * fc - rm * v[k - nz]) / (hr * g.r_face(i))
            } else if axis {
                4.0 * fc / hr
            } else {
                2.0 * r * fc / (hr * g.r_min())
            };
            let zm = if j > 0 { v[k - 1] } else { -fc };
            let zp = if j + 1 < nz { v[k + 1] } else { -fc };
            *o = (up - down) / hr + (zp - 2.0 * fc + zm) / (hz * hz);
        }
    });
}

/// Van Leer limiter weights `lambda in [0, 1]` such that the limited slope of
/// cell `i` is `lambda_i (f_{i+1} - f_{i-1}) / 2`.
///
/// The weights are computed from one reference field and can be applied to
/// any other field, which keeps transport linear in the transported field for
/// a fixed reference.
#[derive(Clone, Debug)]
pub struct Limiter {
    pub lr: Vec<f64>,
    pub lz: Vec<f64>,
}

#[inline]
fn van_leer_weight(a: f64, b: f64) -> f64 {
    if a * b > 0.0 {
        let s = a + b;
        4.0 * a * b / (s * s)
    } else {
        0.0
    }
}

impl Limiter {
    pub fn from_reference(f: &ScalarField) -> Limiter {
        let g = *f.grid();
        let (nr, nz) = (g.n_r(), g.n_z());
        let v = f.values();
        let mut lr = vec![0.0; g.len()];
        let mut lz = vec![0.0; g.len()];
        exec::for_each_row2(&mut lr, &mut lz, nz, |i, rr, rz| {
            for j in 0..nz {
                let k = i * nz + j;
                let c = v[k];
                let m = if i > 0 { v[k - nz] } else { -c };
                let p = if i + 1 < nr { v[k + nz] } else { -c };
                rr[j] = van_leer_weight(c - m, p - c);
                let m = if j > 0 { v[k - 1] } else { -c };
                let p = if j + 1 < nz { v[k + 1] } else { -c };
                rz[j] = van_leer_weight(c - m, p - c);
            }
        });
        Limiter { lr, lz }
    }
}

/// Face velocities: `ur_face[i * nz + j]` on radial face `i + 1/2` (between
/// cells `i` and `i + 1`), `uz_face` likewise on axial faces `j + 1/2`.
/// Outer faces carry no advective flux since `f` vanishes there.
#[derive(Clone, Debug)]
pub struct FaceVelocity {
    ur: Vec<f64>,
    uz: Vec<f64>,
}

impl FaceVelocity {
    pub fn from_cells(u: &VectorField) -> FaceVelocity {
        let g = *u.grid();
        let (nr, nz) = (g.n_r(), g.n_z());
        let (a, b) = (u.u_r.values(), u.u_z.values());
        let mut ur = vec![0.0; g.len()];
        let mut uz = vec![0.0; g.len()];
        exec::for_each_row2(&mut ur, &mut uz, nz, |i, rr, rz| {
            for j in 0..nz {
                let k = i * nz + j;
                rr[j] = if i + 1 < nr { 0.5 * (a[k] + a[k + nz]) } else { 0.0 };
                rz[j] = if j + 1 < nz { 0.5 * (b[k] + b[k + 1]) } else { 0.0 };
            }
        });
        FaceVelocity { ur, uz }
    }
}

/// `out -= div_*(u f)` with MUSCL reconstruction using the given limiter.
pub fn advection_add(f: &ScalarField, vel: &FaceVelocity, lim: &Limiter, out: &mut [f64]) {
    let g = *f.grid();
    let (nr, nz) = (g.n_r(), g.n_z());
    let (hr, hz) = (g.h_r(), g.h_z());
    let v = f.values();
    let slope_r = |k: usize, i: usize| -> f64 {
        let c = v[k];
        let m = if i > 0 { v[k - nz] } else { -c };
        let p = if i + 1 < nr { v[k + nz] } else { -c };
        0.5 * lim.lr[k] * (p - m)
    };
    let slope_z = |k: usize, j: usize| -> f64 {
        let c = v[k];
        let m = if j > 0 { v[k - 1] } else { -c };
        let p = if j + 1 < nz { v[k + 1] } else { -c };
        0.5 * lim.lz[k] * (p - m)
    };
    // Flux through radial face i + 1/2.
    let flux_r = |i: usize, j: usize| -> f64 {
        if i + 1 >= nr {
            return 0.0;
        }
        let k = i * nz + j;
        let u = vel.ur[k];
        if u > 0.0 {
            u * (v[k] + 0.5 * slope_r(k, i))
        } else if u < 0.0 {
            u * (v[k + nz] - 0.5 * slope_r(k + nz, i + 1))
        } else {
            0.0
        }
    };
    let flux_z = |i: usize, j: usize| -> f64 {
        if j + 1 >= nz {
            return 0.0;
        }
        let k = i * nz + j;
        let u = vel.uz[k];
        if u > 0.0 {
            u * (v[k] + 0.5 * slope_z(k, j))
        } else if u < 0.0 {
            u * (v[k + 1] - 0.5 * slope_z(k + 1, j + 1))
        } else {
            0.0
        }
    };
    exec::for_each_row(out, nz, |i, row| {
        let mut below = 0.0;
        for (j, o) in row.iter_mut().enumerate() {
            let above = flux_z(i, j);
            let outer = flux_r(i, j);
            let inner = if i > 0 { flux_r(i - 1, j) } else { 0.0 };
            *o -= (outer - inner) / hr + (above - below) / hz;
            below = above;
        }
    });
}

/// Tridiagonal solve (Thomas algorithm), `a` sub-, `b` main, `c` super-diagonal.
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64], scratch: &mut [f64]) {
    let n = d.len();
    scratch[0] = c[0] / b[0];
    d[0] /= b[0];
    for k in 1..n {
        let m = b[k] - a[k] * scratch[k - 1];
        scratch[k] = c[k] / m;
        d[k] = (d[k] - a[k] * d[k - 1]) / m;
    }
    for k in (0..n - 1).rev() {
        d[k] -= scratch[k] * d[k + 1];
    }
}

/// One backward-Euler step of the radial part followed by one of the axial
/// part (locally one-dimensional splitting). Both factors are M-matrices, so
/// the step preserves positivity for any `dt`.
pub fn implicit_diffusion(f: &ScalarField, dt: f64) -> ScalarField {
    let g = *f.grid();
    let (nr, nz) = (g.n_r(), g.n_z());
    let (hr, hz) = (g.h_r(), g.h_z());
    // Radial: coefficients of (L_r f)_i = lo_i f_{i-1} + di_i f_i + hi_i f_{i+1}.
    let mut lo = vec![0.0; nr];
    let mut di = vec![0.0; nr];
    let mut hi = vec![0.0; nr];
    for i in 0..nr {
        let r = g.r(i);
        if i + 1 < nr {
            let c = 1.0 / (hr * hr * g.r_face(i + 1));
            hi[i] += c * g.r(i + 1);
            di[i] -= c * r;
        } else {
            di[i] -= 2.0 * r / (hr * hr * g.r_max());
        }
        if i > 0 {
            let c = 1.0 / (hr * hr * g.r_face(i));
            lo[i] += c * g.r(i - 1);
            di[i] -= c * r;
        } else if g.has_axis() {
            di[i] -= 4.0 / (hr * hr);
        } else {
            di[i] -= 2.0 * r / (hr * hr * g.r_min());
        }
    }
    let a: Vec<f64> = lo.iter().map(|v| -dt * v).collect();
    let b: Vec<f64> = di.iter().map(|v| 1.0 - dt * v).collect();
    let c: Vec<f64> = hi.iter().map(|v| -dt * v).collect();
    // Transpose to column-major so each radial line is contiguous.
    let src = f.values();
    let mut cols = vec![0.0; g.len()];
    exec::for_each_row(&mut cols, nr, |j, col| {
        for (i, x) in col.iter_mut().enumerate() {
            *x = src[i * nz + j];
        }
        let mut s = vec![0.0; nr];
        thomas(&a, &b, &c, col, &mut s);
    });
    let mut out = vec![0.0; g.len()];
    let kz = dt / (hz * hz);
    let az = vec![-kz; nz];
    let cz = vec![-kz; nz];
    let mut bz = vec![1.0 + 2.0 * kz; nz];
    bz[0] += kz;
    bz[nz - 1] += kz;
    exec::for_each_row(&mut out, nz, |i, row| {
        for (j, x) in row.iter_mut().enumerate() {
            *x = cols[j * nr + i];
        }
        let mut s = vec![0.0; nz];
        thomas(&az, &bz, &cz, row, &mut s);
    });
    ScalarField::from_raw(g, out)
}

/// Largest explicit step allowed by the diffusion stencil at unit safety.
pub fn diffusion_limit(g: &Grid) -> f64 {
    g.h_r().min(g.h_z()).powi(2) / 4.0
}
