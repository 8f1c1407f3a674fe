use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether the lattice lives on the physical half-plane (first axis is the
/// radius `r >= 0`) or on an unrestricted rescaled plane `(R, Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    HalfPlane,
    Plane,
}

/// Uniform cell-centred lattice on `[r_min, r_max] x [z_min, z_max]`.
///
/// Values are stored row-major with rows of fixed `i_r`: the flat index of cell
/// `(i_r, i_z)` is `i_r * n_z + i_z`. When `r_min == 0` on the half-plane the
/// lower radial face is the symmetry axis and the first cell centre sits at
/// `h_r / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    r_min: f64,
    r_max: f64,
    z_min: f64,
    z_max: f64,
    n_r: usize,
    n_z: usize,
    geometry: Geometry,
}

pub const MIN_CELLS: usize = 8;

impl Grid {
    /// Physical half-plane grid.
    pub fn new(r_min: f64, r_max: f64, z_min: f64, z_max: f64, n_r: usize, n_z: usize) -> Result<Self> {
        if !(r_min >= 0.0) {
            return Err(Error::invalid(format!("r_min must be >= 0, got {r_min}")));
        }
        Self::build(r_min, r_max, z_min, z_max, n_r, n_z, Geometry::HalfPlane)
    }

    /// Square rescaled frame `[-extent, extent]^2` with `resolution` cells per side.
    pub fn frame(extent: f64, resolution: usize) -> Result<Self> {
        if !(extent > 0.0) {
            return Err(Error::invalid(format!("frame extent must be positive, got {extent}")));
        }
        Self::build(-extent, extent, -extent, extent, resolution, resolution, Geometry::Plane)
    }

    fn build(
        r_min: f64,
        r_max: f64,
        z_min: f64,
        z_max: f64,
        n_r: usize,
        n_z: usize,
        geometry: Geometry,
    ) -> Result<Self> {
        let finite = [r_min, r_max, z_min, z_max].iter().all(|v| v.is_finite());
        if !finite || !(r_max > r_min) || !(z_max > z_min) {
            return Err(Error::invalid(format!(
                "degenerate grid box [{r_min}, {r_max}] x [{z_min}, {z_max}]"
            )));
        }
        if n_r < MIN_CELLS || n_z < MIN_CELLS {
            return Err(Error::invalid(format!(
                "grid needs at least {MIN_CELLS} cells per direction, got {n_r} x {n_z}"
            )));
        }
        Ok(Grid {
            r_min,
            r_max,
            z_min,
            z_max,
            n_r,
            n_z,
            geometry,
        })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn z_min(&self) -> f64 {
        self.z_min
    }
    pub fn z_max(&self) -> f64 {
        self.z_max
    }
    pub fn n_r(&self) -> usize {
        self.n_r
    }
    pub fn n_z(&self) -> usize {
        self.n_z
    }
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }
    pub fn len(&self) -> usize {
        self.n_r * self.n_z
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn h_r(&self) -> f64 {
        (self.r_max - self.r_min) / self.n_r as f64
    }
    pub fn h_z(&self) -> f64 {
        (self.z_max - self.z_min) / self.n_z as f64
    }
    pub fn cell_area(&self) -> f64 {
        self.h_r() * self.h_z()
    }

    /// True when the lower radial face is the symmetry axis `r = 0`.
    pub fn has_axis(&self) -> bool {
        self.geometry == Geometry::HalfPlane && self.r_min == 0.0
    }

    /// Centre of radial cell `i`. Computed from the box midpoint so that a
    /// symmetric box yields exactly mirrored centres.
    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        0.5 * (self.r_min + self.r_max) + (i as f64 + 0.5 - 0.5 * self.n_r as f64) * self.h_r()
    }

    #[inline]
    pub fn z(&self, j: usize) -> f64 {
        0.5 * (self.z_min + self.z_max) + (j as f64 + 0.5 - 0.5 * self.n_z as f64) * self.h_z()
    }

    /// Radial position of face `i` (between cells `i - 1` and `i`), `0..=n_r`.
    #[inline]
    pub fn r_face(&self, i: usize) -> f64 {
        if i == 0 {
            self.r_min
        } else if i == self.n_r {
            self.r_max
        } else {
            self.r_min + i as f64 * self.h_r()
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_z + j
    }

    /// Cell containing `(r, z)`, if inside the box.
    pub fn locate(&self, r: f64, z: f64) -> Option<(usize, usize)> {
        if !self.contains(r, z) {
            return None;
        }
        let i = (((r - self.r_min) / self.h_r()) as usize).min(self.n_r - 1);
        let j = (((z - self.z_min) / self.h_z()) as usize).min(self.n_z - 1);
        Some((i, j))
    }

    pub fn contains(&self, r: f64, z: f64) -> bool {
        r >= self.r_min && r <= self.r_max && z >= self.z_min && z <= self.z_max
    }

    /// Same box and geometry with every spacing halved.
    pub fn refined(&self) -> Grid {
        Grid {
            n_r: 2 * self.n_r,
            n_z: 2 * self.n_z,
            ..*self
        }
    }

    /// Bit-level identity of two lattices.
    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_boxes() {
        assert!(Grid::new(-0.1, 1.0, 0.0, 1.0, 8, 8).is_err());
        assert!(Grid::new(1.0, 1.0, 0.0, 1.0, 8, 8).is_err());
        assert!(Grid::new(0.0, 1.0, 0.0, 1.0, 7, 8).is_err());
        assert!(Grid::new(0.0, 1.0, 0.0, f64::NAN, 8, 8).is_err());
        assert!(Grid::frame(0.0, 16).is_err());
    }

    #[test]
    fn axis_cell_centre_is_half_spacing() {
        let g = Grid::new(0.0, 2.0, -1.0, 1.0, 64, 64).unwrap();
        assert!(g.has_axis());
        assert!((g.r(0) - g.h_r() / 2.0).abs() < 1e-15);
        assert!((g.r(63) - (2.0 - g.h_r() / 2.0)).abs() < 1e-14);
        let off = Grid::new(0.5, 2.0, -1.0, 1.0, 64, 64).unwrap();
        assert!(!off.has_axis());
    }

    #[test]
    fn frame_centres_mirror_exactly() {
        let g = Grid::frame(10.0, 256).unwrap();
        for k in 0..256 {
            assert_eq!(g.r(k), -g.r(255 - k));
            assert_eq!(g.z(k), g.r(k));
        }
    }

    #[test]
    fn locate_round_trips_centres() {
        let g = Grid::new(0.0, 1.5, -0.75, 0.75, 30, 40).unwrap();
        for i in [0, 7, 29] {
            for j in [0, 13, 39] {
                assert_eq!(g.locate(g.r(i), g.z(j)), Some((i, j)));
            }
        }
        assert_eq!(g.locate(1.6, 0.0), None);
    }
}
