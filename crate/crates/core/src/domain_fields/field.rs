use crate::domain_fields::Grid;
use crate::error::{Error, Result};
use crate::exec;

/// Cell values on a [`Grid`], row-major in `i_r` (see [`Grid::idx`]).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at flat index {k}")));
        }
        Ok(ScalarField { grid, values })
    }

    /// Unchecked constructor for solver internals; finiteness is checked by
    /// the caller's invariants.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    /// Samples `f(r, z)` at every cell centre.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let mut values = vec![0.0; grid.len()];
        exec::for_each_row(&mut values, grid.n_z(), |i, row| {
            let r = grid.r(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(r, grid.z(j));
            }
        });
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.n_z();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &ScalarField) -> Result<()> {
        self.check_same_grid(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::invalid("fields live on different grids"))
        }
    }
}

/// Velocity `(u^r, u^z)` sampled at cell centres.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub u_r: ScalarField,
    pub u_z: ScalarField,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            u_r: ScalarField::zeros(grid),
            u_z: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u_r.grid()
    }

    /// Maximum pointwise speed.
    pub fn max_speed(&self) -> f64 {
        self.u_r
            .values()
            .iter()
            .zip(self.u_z.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// Largest `|(1/r) d_r(r u^r) + d_z u^z|` over cells not adjacent to the
    /// box boundary, using centred differences. On the half-plane this is the
    /// discrete form of `d_r u^r + u^r/r + d_z u^z`.
    pub fn divergence_max(&self) -> f64 {
        let g = *self.grid();
        let (hr, hz) = (g.h_r(), g.h_z());
        if g.n_r() < 3 || g.n_z() < 3 {
            return 0.0;
        }
        let (ur, uz) = (&self.u_r, &self.u_z);
        let per_row = exec::map_indices(g.n_r() - 2, |k| {
            let i = k + 1;
            let (rm, r0, rp) = (g.r(i - 1), g.r(i), g.r(i + 1));
            let mut m: f64 = 0.0;
            for j in 1..g.n_z() - 1 {
                let d = if g.geometry() == crate::domain_fields::Geometry::HalfPlane {
                    (rp * ur.at(i + 1, j) - rm * ur.at(i - 1, j)) / (2.0 * hr * r0)
                } else {
                    (ur.at(i + 1, j) - ur.at(i - 1, j)) / (2.0 * hr)
                } + (uz.at(i, j + 1) - uz.at(i, j - 1)) / (2.0 * hz);
                m = m.max(d.abs());
            }
            m
        });
        per_row.into_iter().fold(0.0, f64::max)
    }
}
