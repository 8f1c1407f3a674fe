//! Rescaled frames `f(R, Z) = (t / alpha_i) omega_i(t, r_i + sqrt(t) R, z_i + sqrt(t) Z)`.
//!
//! Frame values are cell averages of the bilinear interpolant of the physical
//! field through its cell centres. The interpolant integrates to the same mass
//! as the cell data, so projection conserves mass. Reference profiles (`G`,
//! `f_0`) are sampled on the physical grid and pushed through the same
//! projection, so interpolation error cancels in differences such as `f - G`.

use crate::domain_fields::{oseen, Filament, Grid, ScalarField};
use crate::dynamics::SimulationState;
use crate::error::{Error, Result};
use crate::exec;
use crate::selfsim::cutoff::chi;

/// Integral of the unit hat of half-width `h` centred at 0 over `(-inf, x]`.
#[inline]
fn hat_cdf(x: f64, h: f64) -> f64 {
    if x <= -h {
        0.0
    } else if x <= 0.0 {
        (x + h) * (x + h) / (2.0 * h)
    } else if x < h {
        h - (h - x) * (h - x) / (2.0 * h)
    } else {
        h
    }
}

/// For each frame cell along one direction, the physical cells whose hats
/// overlap it and the overlap integrals (physical length units).
fn weights(
    n_frame: usize,
    frame_lo: f64,
    frame_h: f64,
    phys_lo: f64,
    phys_h: f64,
    n_phys: usize,
    axis: bool,
    clip_at_zero: bool,
) -> Vec<Vec<(usize, f64)>> {
    (0..n_frame)
        .map(|c| {
            let mut a = frame_lo + c as f64 * frame_h;
            let b = a + frame_h;
            if clip_at_zero {
                if 0.5 * (a + b) <= 0.0 {
                    return Vec::new();
                }
                a = a.max(0.0);
            }
            let first = ((a - phys_lo) / phys_h - 1.5).floor() as i64;
            let last = ((b - phys_lo) / phys_h + 0.5).ceil() as i64;
            let mut out: Vec<(usize, f64)> = Vec::new();
            for i in first.max(-1)..=last.min(n_phys as i64 - 1) {
                let centre = phys_lo + (i as f64 + 0.5) * phys_h;
                let w = hat_cdf(b - centre, phys_h) - hat_cdf(a - centre, phys_h);
                if w == 0.0 {
                    continue;
                }
                if i < 0 {
                    // Ghost cell across the axis carries -f_0.
                    if axis {
                        push(&mut out, 0, -w);
                    }
                } else {
                    push(&mut out, i as usize, w);
                }
            }
            out
        })
        .collect()
}

fn push(v: &mut Vec<(usize, f64)>, i: usize, w: f64) {
    if let Some(e) = v.iter_mut().find(|e| e.0 == i) {
        e.1 += w;
    } else {
        v.push((i, w));
    }
}

/// Linear map from fields on one physical grid to one rescaled frame.
#[derive(Clone, Debug)]
pub struct FrameProjector {
    phys: Grid,
    frame: Grid,
    filament: Filament,
    t: f64,
    wr: Vec<Vec<(usize, f64)>>,
    wz: Vec<Vec<(usize, f64)>>,
}

impl FrameProjector {
    /// Requires the part of the frame with `r > 0` to lie inside `phys`.
    pub fn new(phys: &Grid, filament: Filament, t: f64, extent: f64, resolution: usize) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::invalid(format!("t must be positive, got {t}")));
        }
        let frame = Grid::frame(extent, resolution)?;
        let st = t.sqrt();
        let r_lo = (filament.r - extent * st).max(0.0);
        let r_hi = filament.r + extent * st;
        let z_lo = filament.z - extent * st;
        let z_hi = filament.z + extent * st;
        let tol = 1e-12 * (1.0 + phys.r_max().abs() + phys.z_max().abs());
        if r_lo < phys.r_min() - tol || r_hi > phys.r_max() + tol || z_lo < phys.z_min() - tol || z_hi > phys.z_max() + tol {
            return Err(Error::invalid(format!(
                "frame [{r_lo:.4}, {r_hi:.4}] x [{z_lo:.4}, {z_hi:.4}] escapes the grid [{:.4}, {:.4}] x [{:.4}, {:.4}]",
                phys.r_min(),
                phys.r_max(),
                phys.z_min(),
                phys.z_max()
            )));
        }
        let fh = 2.0 * extent / resolution as f64 * st;
        let wr = weights(
            resolution,
            filament.r - extent * st,
            fh,
            phys.r_min(),
            phys.h_r(),
            phys.n_r(),
            phys.has_axis(),
            true,
        );
        let wz = weights(
            resolution,
            filament.z - extent * st,
            fh,
            phys.z_min(),
            phys.h_z(),
            phys.n_z(),
            false,
            false,
        );
        Ok(FrameProjector {
            phys: *phys,
            frame,
            filament,
            t,
            wr,
            wz,
        })
    }

    pub fn frame_grid(&self) -> &Grid {
        &self.frame
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn filament(&self) -> Filament {
        self.filament
    }

    /// Frame image of a physical field.
    pub fn project(&self, omega: &ScalarField) -> Result<ScalarField> {
        if !omega.grid().same_as(&self.phys) {
            return Err(Error::invalid("field does not live on the projector's grid"));
        }
        let n = self.frame.n_r();
        let (nzp, nzf) = (self.phys.n_z(), self.frame.n_z());
        // f = (t / alpha) * (sum omega Wr Wz) / (physical cell area t dR dZ).
        let scale = 1.0 / (self.filament.alpha * self.frame.h_r() * self.frame.h_z());
        // Physical rows touched by the frame.
        let (mut lo, mut hi) = (usize::MAX, 0);
        for w in &self.wr {
            for &(i, _) in w {
                lo = lo.min(i);
                hi = hi.max(i);
            }
        }
        if lo > hi {
            return Ok(ScalarField::zeros(self.frame));
        }
        // Contract along z first: tmp[(i - lo) * nzf + d] = sum_j wz[d][j] omega[i][j].
        let mut tmp = vec![0.0; (hi - lo + 1) * nzf];
        exec::for_each_row(&mut tmp, nzf, |ii, row| {
            let src = &omega.values()[(lo + ii) * nzp..(lo + ii + 1) * nzp];
            for (d, v) in row.iter_mut().enumerate() {
                *v = self.wz[d].iter().map(|&(j, w)| w * src[j]).sum();
            }
        });
        let mut out = vec![0.0; n * nzf];
        exec::for_each_row(&mut out, nzf, |c, row| {
            for &(i, w) in &self.wr[c] {
                let src = &tmp[(i - lo) * nzf..(i - lo + 1) * nzf];
                for (o, s) in row.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
            row.iter_mut().for_each(|v| *v *= scale);
        });
        ScalarField::from_values(self.frame, out)
    }

    /// Samples `profile(X)` as the physical field `(alpha / t) profile((x - x_i)/sqrt(t))`
    /// and projects it.
    pub fn project_profile<F>(&self, profile: F) -> Result<ScalarField>
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let f = self.filament;
        let (st, amp) = (self.t.sqrt(), f.alpha / self.t);
        let phys = ScalarField::from_fn(self.phys, |r, z| amp * profile((r - f.r) / st, (z - f.z) / st));
        self.project(&phys)
    }

    /// Image of the Oseen profile `G`.
    pub fn oseen(&self) -> Result<ScalarField> {
        self.project_profile(oseen)
    }

    /// Image of the background `f_0 = G chi(sqrt(t) |X| / d)`.
    pub fn background_f0(&self, d: f64) -> Result<ScalarField> {
        let st = self.t.sqrt();
        self.project_profile(move |x, y| oseen(x, y) * chi(st * x.hypot(y) / d))
    }
}

/// Rescaled profile of one filament together with the matching image of `G`.
#[derive(Clone, Debug)]
pub struct RescaledFrame {
    pub filament_index: usize,
    pub t: f64,
    pub epsilon: f64,
    pub extent: f64,
    pub resolution: usize,
    pub f: ScalarField,
    /// `G` in the same discretisation as `f`.
    pub oseen: ScalarField,
}

impl RescaledFrame {
    /// Frame around filament `i` of a running simulation.
    pub fn from_state(state: &SimulationState, i: usize, extent: f64, resolution: usize) -> Result<Self> {
        let fil = *state
            .config()
            .filaments()
            .get(i)
            .ok_or_else(|| Error::invalid(format!("no filament {i}")))?;
        let p = FrameProjector::new(state.grid(), fil, state.t, extent, resolution)?;
        Self::from_projector(&p, i, &state.omega_parts[i])
    }

    pub fn from_projector(p: &FrameProjector, i: usize, omega_i: &ScalarField) -> Result<Self> {
        let g = p.frame_grid();
        Ok(RescaledFrame {
            filament_index: i,
            t: p.t,
            epsilon: p.t.sqrt() / p.filament.r,
            extent: g.r_max(),
            resolution: g.n_r(),
            f: p.project(omega_i)?,
            oseen: p.oseen()?,
        })
    }

    /// Frame holding a profile given directly in rescaled variables; `G` is
    /// sampled at cell centres and masked to `1 + epsilon R > 0`.
    pub fn from_profile(i: usize, t: f64, epsilon: f64, f: ScalarField) -> Result<Self> {
        let g = *f.grid();
        if g.geometry() != crate::domain_fields::Geometry::Plane {
            return Err(Error::invalid("profile must live on a rescaled frame"));
        }
        let oseen = ScalarField::from_fn(g, |x, y| if 1.0 + epsilon * x > 0.0 { oseen(x, y) } else { 0.0 });
        Ok(RescaledFrame {
            filament_index: i,
            t,
            epsilon,
            extent: g.r_max(),
            resolution: g.n_r(),
            f,
            oseen,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_fields::integral;
    use crate::dynamics::gaussian;

    fn setup(h_per_sqrt_t: f64) -> (Grid, Filament, f64) {
        let t: f64 = 1e-4;
        let h = t.sqrt() / h_per_sqrt_t;
        let n = (0.3 / h).round() as usize;
        let g = Grid::new(0.85, 0.85 + n as f64 * h, -0.15, -0.15 + n as f64 * h, n, n).unwrap();
        (g, Filament { alpha: 2.0, r: 1.0, z: 0.0 }, t)
    }

    #[test]
    fn hat_weights_partition_the_line() {
        let w = weights(40, 0.0, 0.05, 0.0, 0.1, 20, false, false);
        let mut per_cell = vec![0.0; 20];
        for v in &w {
            for &(i, x) in v {
                per_cell[i] += x;
            }
        }
        // Interior hats integrate to their full width.
        for c in &per_cell[1..19] {
            assert!((c - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_gaussian_maps_to_oseen() {
        let (g, fil, t) = setup(10.0);
        let om = ScalarField::from_fn(g, gaussian(fil.alpha, fil.r, fil.z, t));
        let p = FrameProjector::new(&g, fil, t, 10.0, 256).unwrap();
        let fr = RescaledFrame::from_projector(&p, 0, &om).unwrap();
        let exact = ScalarField::from_fn(*p.frame_grid(), oseen);
        let err = fr.f.sub(&exact).unwrap().max_abs();
        assert!(err < 1e-4, "L-inf error {err:.3e}");
        assert!((integral(&fr.f) - 1.0).abs() < 1e-4);
        // Same physical data through the same map.
        assert!(fr.f.sub(&fr.oseen).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn projection_conserves_mass() {
        let (g, fil, t) = setup(4.0);
        let om = ScalarField::from_fn(g, gaussian(fil.alpha, fil.r + 0.003, fil.z - 0.002, t));
        let p = FrameProjector::new(&g, fil, t, 10.0, 200).unwrap();
        let f = p.project(&om).unwrap();
        let mass = crate::domain_fields::lp_norm(&om, 1.0).unwrap() / fil.alpha;
        assert!((integral(&f) - mass).abs() < 1e-6, "{} vs {mass}", integral(&f));
    }

    #[test]
    fn zero_maps_to_zero_and_escape_is_rejected() {
        let (g, fil, t) = setup(4.0);
        let p = FrameProjector::new(&g, fil, t, 10.0, 64).unwrap();
        assert!(p.project(&ScalarField::zeros(g)).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(FrameProjector::new(&g, fil, t, 20.0, 64).is_err());
    }

    #[test]
    fn frame_crossing_the_axis_is_zero_beyond_it() {
        let g = Grid::new(0.0, 0.4, -0.2, 0.2, 128, 128).unwrap();
        let fil = Filament { alpha: 1.0, r: 0.1, z: 0.0 };
        let t = 2.5e-4;
        let om = ScalarField::from_fn(g, gaussian(1.0, 0.1, 0.0, t));
        let p = FrameProjector::new(&g, fil, t, 10.0, 100).unwrap();
        let f = p.project(&om).unwrap();
        let fg = *f.grid();
        for c in 0..fg.n_r() {
            if 1.0 + (t.sqrt() / fil.r) * fg.r(c) <= 0.0 {
                assert!(f.row(c).iter().all(|&v| v == 0.0));
            }
        }
    }
}
