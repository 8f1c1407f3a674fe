//! Cell-centred multigrid for the stream-function equation.
//!
//! Dividing `(d_r^2 - (1/r) d_r + d_z^2) psi = -r omega` by `r` gives the
//! symmetric form `d_r((1/r) d_r psi) + (1/r) d_z^2 psi = -omega`. Its
//! five-point discretisation `-A psi = omega` is symmetric positive definite:
//! every face carries a conductance and the diagonal is their sum. Dirichlet
//! faces sit half a cell from the centre; the axis face uses the flux
//! `(1/r) d_r psi |_{r=0} = 8 psi_0 / h_r^2`, exact for `psi ~ r^2`.

use crate::domain_fields::Grid;
use crate::error::{Error, Result};
use crate::exec::{self, SharedSlice};

const PRE_SMOOTH: usize = 2;
const POST_SMOOTH: usize = 2;
const COARSEST_CELLS: usize = 8;
const MAX_CYCLES: usize = 500;
const STALL_FACTOR: f64 = 0.9;
const STALL_CYCLES: usize = 5;

#[derive(Clone, Debug)]
pub(crate) struct Level {
    pub n_r: usize,
    pub n_z: usize,
    /// Radial face conductances, `n_r + 1` entries; face `i` sits below cell `i`.
    cr: Vec<f64>,
    /// Interior axial conductance per row.
    cz: Vec<f64>,
    /// Axial conductance of the two boundary faces per row.
    cz_b: Vec<f64>,
    /// Cell-centre radius per row (used for the residual weighting).
    pub r: Vec<f64>,
}

impl Level {
    fn new(grid: &Grid, n_r: usize, n_z: usize) -> Level {
        let hr = (grid.r_max() - grid.r_min()) / n_r as f64;
        let hz = (grid.z_max() - grid.z_min()) / n_z as f64;
        let r: Vec<f64> = (0..n_r).map(|i| grid.r_min() + (i as f64 + 0.5) * hr).collect();
        let mut cr = vec![0.0; n_r + 1];
        for (i, c) in cr.iter_mut().enumerate().take(n_r).skip(1) {
            *c = 1.0 / ((grid.r_min() + i as f64 * hr) * hr * hr);
        }
        cr[0] = if grid.has_axis() {
            8.0 / (hr * hr * hr)
        } else {
            2.0 / (grid.r_min() * hr * hr)
        };
        cr[n_r] = 2.0 / (grid.r_max() * hr * hr);
        let cz: Vec<f64> = r.iter().map(|ri| 1.0 / (ri * hz * hz)).collect();
        let cz_b = cz.iter().map(|c| 2.0 * c).collect();
        Level {
            n_r,
            n_z,
            cr,
            cz,
            cz_b,
            r,
        }
    }

    #[inline]
    fn zc(&self, i: usize, j: usize) -> (f64, f64) {
        let lo = if j == 0 { self.cz_b[i] } else { self.cz[i] };
        let hi = if j + 1 == self.n_z { self.cz_b[i] } else { self.cz[i] };
        (lo, hi)
    }

    #[inline]
    fn diag(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = self.zc(i, j);
        self.cr[i] + self.cr[i + 1] + lo + hi
    }

    /// Sum of conductance-weighted neighbours (outside cells count as zero).
    #[inline]
    fn off(&self, x: &impl Fn(usize) -> f64, i: usize, j: usize) -> f64 {
        let nz = self.n_z;
        let k = i * nz + j;
        let (lo, hi) = self.zc(i, j);
        let mut s = 0.0;
        if i > 0 {
            s += self.cr[i] * x(k - nz);
        }
        if i + 1 < self.n_r {
            s += self.cr[i + 1] * x(k + nz);
        }
        if j > 0 {
            s += lo * x(k - 1);
        }
        if j + 1 < nz {
            s += hi * x(k + 1);
        }
        s
    }

    /// `y = (-A) x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let get = |k: usize| x[k];
        exec::for_each_row(y, self.n_z, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.diag(i, j) * x[i * self.n_z + j] - self.off(&get, i, j);
            }
        });
    }

    /// `res = b - (-A) x`.
    fn residual(&self, x: &[f64], b: &[f64], res: &mut [f64]) {
        let (nr, nz) = (self.n_r, self.n_z);
        exec::for_each_row(res, nz, |i, row| {
            let base = i * nz;
            let xc = &x[base..base + nz];
            let bc = &b[base..base + nz];
            let (cl, ch) = (self.cr[i], self.cr[i + 1]);
            let (cz, czb) = (self.cz[i], self.cz_b[i]);
            let d_mid = cl + ch + 2.0 * cz;
            for (j, v) in row.iter_mut().enumerate() {
                let mut s = bc[j];
                if i > 0 {
                    s += cl * x[base - nz + j];
                }
                if i + 1 < nr {
                    s += ch * x[base + nz + j];
                }
                let mut d = d_mid;
                if j > 0 {
                    s += cz * xc[j - 1];
                } else {
                    d += czb - cz;
                }
                if j + 1 < nz {
                    s += cz * xc[j + 1];
                } else {
                    d += czb - cz;
                }
                *v = s - d * xc[j];
            }
        });
    }

    fn smooth(&self, x: &mut [f64], b: &[f64], sweeps: usize) {
        let (nr, nz) = (self.n_r, self.n_z);
        for _ in 0..sweeps {
            for color in 0..2 {
                let xs = SharedSlice::new(x);
                exec::for_each_index(nr, |i| {
                    let base = i * nz;
                    let cl = if i > 0 { self.cr[i] } else { 0.0 };
                    let ch = if i + 1 < nr { self.cr[i + 1] } else { 0.0 };
                    let (cz, czb) = (self.cz[i], self.cz_b[i]);
                    let d_mid = self.cr[i] + self.cr[i + 1] + 2.0 * cz;
                    let inv_mid = 1.0 / d_mid;
                    let inv_edge = 1.0 / (d_mid + czb - cz);
                    // Missing neighbours read as zero through the zero conductance.
                    let lo = if i > 0 { base - nz } else { base };
                    let hi = if i + 1 < nr { base + nz } else { base };
                    let mut j = (color + i) % 2;
                    while j < nz {
                        let k = base + j;
                        let mut s = b[k] + cl * xs.get(lo + j) + ch * xs.get(hi + j);
                        if j > 0 {
                            s += cz * xs.get(k - 1);
                        }
                        if j + 1 < nz {
                            s += cz * xs.get(k + 1);
                        }
                        let inv = if j == 0 || j + 1 == nz { inv_edge } else { inv_mid };
                        xs.set(k, s * inv);
                        j += 2;
                    }
                });
            }
        }
    }

    pub fn diag_vec(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_r * self.n_z];
        exec::for_each_row(&mut d, self.n_z, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.diag(i, j);
            }
        });
        d
    }
}

/// Reusable multigrid hierarchy for one grid.
#[derive(Clone, Debug)]
pub struct StreamSolver {
    grid: Grid,
    levels: Vec<Level>,
    // Per-level scratch: solution, right-hand side, residual.
    xs: Vec<Vec<f64>>,
    bs: Vec<Vec<f64>>,
    rs: Vec<Vec<f64>>,
}

/// Outcome of one solve.
#[derive(Clone, Debug, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub final_residual: f64,
    pub used_cg: bool,
    pub history: Vec<f64>,
}

impl StreamSolver {
    pub fn new(grid: &Grid) -> Self {
        let mut levels = vec![Level::new(grid, grid.n_r(), grid.n_z())];
        loop {
            let last = levels.last().unwrap();
            let (nr, nz) = (last.n_r, last.n_z);
            if nr % 2 != 0 || nz % 2 != 0 || nr / 2 < 2 || nz / 2 < 2 || nr.min(nz) <= COARSEST_CELLS {
                break;
            }
            levels.push(Level::new(grid, nr / 2, nz / 2));
        }
        let sizes: Vec<usize> = levels.iter().map(|l| l.n_r * l.n_z).collect();
        StreamSolver {
            grid: *grid,
            xs: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            bs: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            rs: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            levels,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    #[cfg(test)]
    fn fine(&self) -> &Level {
        &self.levels[0]
    }

    /// Relative residual in the unsymmetrised form, `|r (b + A x)| / |r b0|`.
    fn rel_residual(&self, x: &[f64], b: &[f64], denom: f64, scratch: &mut [f64]) -> f64 {
        let l = &self.levels[0];
        l.residual(x, b, scratch);
        let nz = l.n_z;
        let s = exec::sum_rows(l.n_r, |i| {
            let ri = l.r[i];
            scratch[i * nz..(i + 1) * nz].iter().map(|v| (ri * v) * (ri * v)).sum::<f64>()
        });
        s.sqrt() / denom
    }

    /// Solves `(-A) x = b` in place starting from the given `x`.
    /// `omega_norm` is `|r omega|_2` used to normalise the residual.
    pub fn solve(&mut self, x: &mut [f64], b: &[f64], omega_norm: f64, tol: f64) -> Result<SolveStats> {
        let n = self.levels[0].n_r * self.levels[0].n_z;
        assert_eq!(x.len(), n);
        assert_eq!(b.len(), n);
        let mut stats = SolveStats::default();
        let denom = if omega_norm > 0.0 { omega_norm } else { 1.0 };
        let mut scratch = std::mem::take(&mut self.rs[0]);
        let mut rel = self.rel_residual(x, b, denom, &mut scratch);
        self.rs[0] = scratch;
        stats.history.push(rel);
        if rel <= tol {
            stats.final_residual = rel;
            return Ok(stats);
        }
        let mut stalled = 0;
        while stats.iterations < MAX_CYCLES {
            self.xs[0].copy_from_slice(x);
            self.bs[0].copy_from_slice(b);
            self.vcycle(0);
            x.copy_from_slice(&self.xs[0]);
            stats.iterations += 1;
            let mut scratch = std::mem::take(&mut self.rs[0]);
            let next = self.rel_residual(x, b, denom, &mut scratch);
            self.rs[0] = scratch;
            stats.history.push(next);
            if !next.is_finite() {
                break;
            }
            if next <= tol {
                stats.final_residual = next;
                return Ok(stats);
            }
            stalled = if next > STALL_FACTOR * rel { stalled + 1 } else { 0 };
            rel = next;
            if stalled >= STALL_CYCLES {
                break;
            }
        }
        // Multigrid stalled or hit its cap: fall back to preconditioned CG.
        stats.used_cg = true;
        let cap = 20 * (self.grid.n_r() + self.grid.n_z()) + 2000;
        let (its, res) = self.cg(x, b, denom, tol, cap, &mut stats.history);
        stats.iterations += its;
        stats.final_residual = res;
        if res <= tol {
            Ok(stats)
        } else {
            Err(Error::SolverFailure {
                iterations: stats.iterations,
                residual_history: stats.history,
            })
        }
    }

    fn vcycle(&mut self, lv: usize) {
        if lv + 1 == self.levels.len() {
            let level = &self.levels[lv];
            let mut x = std::mem::take(&mut self.xs[lv]);
            let b = std::mem::take(&mut self.bs[lv]);
            x.iter_mut().for_each(|v| *v = 0.0);
            coarse_cg(level, &mut x, &b);
            self.xs[lv] = x;
            self.bs[lv] = b;
            return;
        }
        {
            let level = &self.levels[lv];
            level.smooth(&mut self.xs[lv], &self.bs[lv], PRE_SMOOTH);
            level.residual(&self.xs[lv], &self.bs[lv], &mut self.rs[lv]);
        }
        let (fine_nz, coarse) = (self.levels[lv].n_z, &self.levels[lv + 1]);
        {
            let res = &self.rs[lv];
            let cb = &mut self.bs[lv + 1];
            let cnz = coarse.n_z;
            exec::for_each_row(cb, cnz, |ci, row| {
                for (cj, v) in row.iter_mut().enumerate() {
                    let k = (2 * ci) * fine_nz + 2 * cj;
                    *v = 0.25 * (res[k] + res[k + 1] + res[k + fine_nz] + res[k + fine_nz + 1]);
                }
            });
        }
        self.xs[lv + 1].iter_mut().for_each(|v| *v = 0.0);
        self.vcycle(lv + 1);
        {
            let (cnr, cnz) = (self.levels[lv + 1].n_r, self.levels[lv + 1].n_z);
            let e = std::mem::take(&mut self.xs[lv + 1]);
            prolong_add(&e, cnr, cnz, &mut self.xs[lv]);
            self.xs[lv + 1] = e;
        }
        let level = &self.levels[lv];
        level.smooth(&mut self.xs[lv], &self.bs[lv], POST_SMOOTH);
    }

    /// Jacobi-preconditioned conjugate gradient on the fine level.
    fn cg(&mut self, x: &mut [f64], b: &[f64], denom: f64, tol: f64, cap: usize, history: &mut Vec<f64>) -> (usize, f64) {
        let level = self.levels[0].clone();
        let n = x.len();
        let dinv: Vec<f64> = level.diag_vec().iter().map(|d| 1.0 / d).collect();
        let mut r = vec![0.0; n];
        level.residual(x, b, &mut r);
        let mut zv: Vec<f64> = r.iter().zip(&dinv).map(|(a, d)| a * d).collect();
        let mut p = zv.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &zv);
        let mut scratch = vec![0.0; n];
        let mut res = self.rel_residual(x, b, denom, &mut scratch);
        let mut its = 0;
        while its < cap && res > tol {
            level.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let a = rz / pap;
            for k in 0..n {
                x[k] += a * p[k];
                r[k] -= a * ap[k];
            }
            for k in 0..n {
                zv[k] = r[k] * dinv[k];
            }
            let rz_new = dot(&r, &zv);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = zv[k] + beta * p[k];
            }
            its += 1;
            if its % 25 == 0 {
                res = self.rel_residual(x, b, denom, &mut scratch);
                history.push(res);
            }
        }
        res = self.rel_residual(x, b, denom, &mut scratch);
        history.push(res);
        (its, res)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact-enough coarsest solve.
fn coarse_cg(level: &Level, x: &mut [f64], b: &[f64]) {
    let n = x.len();
    let bn = dot(b, b).sqrt();
    if bn == 0.0 {
        return;
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for _ in 0..4 * n {
        level.apply(&p, &mut ap);
        let a = rr / dot(&p, &ap);
        for k in 0..n {
            x[k] += a * p[k];
            r[k] -= a * ap[k];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= 1e-14 * bn {
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
    }
}

/// Bilinear cell-centred prolongation of the coarse correction `e`, with
/// odd reflection across every boundary face.
fn prolong_add(e: &[f64], cnr: usize, cnz: usize, fine: &mut [f64]) {
    let get = |ci: isize, cj: isize| -> f64 {
        let mut s = 1.0;
        let (mut a, mut b) = (ci, cj);
        if a < 0 || a >= cnr as isize {
            s = -s;
            a = a.clamp(0, cnr as isize - 1);
        }
        if b < 0 || b >= cnz as isize {
            s = -s;
            b = b.clamp(0, cnz as isize - 1);
        }
        s * e[a as usize * cnz + b as usize]
    };
    let fnz = 2 * cnz;
    exec::for_each_row(fine, fnz, |fi, row| {
        let ci = (fi / 2) as isize;
        let si: isize = if fi % 2 == 0 { -1 } else { 1 };
        for (fj, v) in row.iter_mut().enumerate() {
            let cj = (fj / 2) as isize;
            let sj: isize = if fj % 2 == 0 { -1 } else { 1 };
            *v += 0.5625 * get(ci, cj)
                + 0.1875 * (get(ci + si, cj) + get(ci, cj + sj))
                + 0.0625 * get(ci + si, cj + sj);
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual_of(solver: &StreamSolver, x: &[f64], b: &[f64]) -> f64 {
        let mut r = vec![0.0; x.len()];
        solver.fine().residual(x, b, &mut r);
        dot(&r, &r).sqrt() / dot(b, b).sqrt()
    }

    #[test]
    fn operator_is_symmetric() {
        let g = Grid::new(0.0, 1.0, -0.5, 0.5, 16, 16).unwrap();
        let s = StreamSolver::new(&g);
        let n = g.len();
        let u: Vec<f64> = (0..n).map(|k| ((k * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let v: Vec<f64> = (0..n).map(|k| ((k * 13 % 17) as f64 - 8.0) / 3.0).collect();
        let (mut au, mut av) = (vec![0.0; n], vec![0.0; n]);
        s.fine().apply(&u, &mut au);
        s.fine().apply(&v, &mut av);
        let (a, b) = (dot(&v, &au), dot(&u, &av));
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        assert!(dot(&u, &au) > 0.0);
    }

    #[test]
    fn vcycles_converge_fast_with_axis() {
        let g = Grid::new(0.0, 2.0, -1.0, 1.0, 128, 128).unwrap();
        let mut s = StreamSolver::new(&g);
        assert!(s.n_levels() >= 4);
        let b: Vec<f64> = (0..g.len())
            .map(|k| {
                let (i, j) = (k / 128, k % 128);
                let (r, z) = (g.r(i), g.z(j));
                (-((r - 1.0).powi(2) + z * z) / 0.02).exp()
            })
            .collect();
        let mut x = vec![0.0; g.len()];
        let stats = s.solve(&mut x, &b, 1.0, 1e-10).unwrap();
        assert!(!stats.used_cg);
        assert!(stats.iterations <= 15, "took {} cycles", stats.iterations);
        assert!(residual_of(&s, &x, &b) < 1e-8);
    }

    #[test]
    fn cg_fallback_agrees_with_multigrid() {
        let g = Grid::new(0.3, 1.3, -0.5, 0.5, 24, 24).unwrap();
        let mut s = StreamSolver::new(&g);
        let b: Vec<f64> = (0..g.len()).map(|k| ((k % 7) as f64).sin()).collect();
        let mut x_mg = vec![0.0; g.len()];
        s.solve(&mut x_mg, &b, 1.0, 1e-12).unwrap();
        let mut x_cg = vec![0.0; g.len()];
        let mut hist = vec![];
        let (_, res) = s.cg(&mut x_cg, &b, 1.0, 1e-12, 10_000, &mut hist);
        assert!(res <= 1e-12);
        let diff = x_mg.iter().zip(&x_cg).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = x_mg.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(diff < 1e-9 * scale);
    }
}
