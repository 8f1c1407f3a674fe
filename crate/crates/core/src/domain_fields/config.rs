use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One circular vortex filament: circulation `alpha` concentrated on the
/// point `(r, z)` of the half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Filament {
    pub alpha: f64,
    pub r: f64,
    pub z: f64,
}

impl Filament {
    pub fn distance_to(&self, other: &Filament) -> f64 {
        (self.r - other.r).hypot(self.z - other.z)
    }
}

/// The initial measure `sum alpha_i delta_{x_i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Filament>", into = "Vec<Filament>")]
pub struct FilamentConfig {
    filaments: Vec<Filament>,
}

impl FilamentConfig {
    pub fn new(filaments: Vec<Filament>) -> Result<Self> {
        if filaments.is_empty() {
            return Err(Error::invalid("at least one filament is required"));
        }
        for (k, f) in filaments.iter().enumerate() {
            if !(f.alpha > 0.0 && f.alpha.is_finite()) {
                return Err(Error::invalid(format!("filament {k}: alpha must be positive, got {}", f.alpha)));
            }
            if !(f.r > 0.0 && f.r.is_finite()) {
                return Err(Error::invalid(format!("filament {k}: r must be positive, got {}", f.r)));
            }
            if !f.z.is_finite() {
                return Err(Error::invalid(format!("filament {k}: z must be finite")));
            }
        }
        for a in 0..filaments.len() {
            for b in a + 1..filaments.len() {
                if filaments[a].distance_to(&filaments[b]) == 0.0 {
                    return Err(Error::invalid(format!("filaments {a} and {b} share a centre")));
                }
            }
        }
        Ok(FilamentConfig { filaments })
    }

    pub fn single(alpha: f64, r: f64, z: f64) -> Result<Self> {
        Self::new(vec![Filament { alpha, r, z }])
    }

    pub fn filaments(&self) -> &[Filament] {
        &self.filaments
    }

    pub fn len(&self) -> usize {
        self.filaments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filaments.is_empty()
    }

    /// Total variation `sum alpha_i` of the initial measure.
    pub fn total_circulation(&self) -> f64 {
        self.filaments.iter().map(|f| f.alpha).sum()
    }

    /// `d = min(min_{i != j} |x_i - x_j|, min_i r_i)`.
    pub fn d(&self) -> f64 {
        let mut d = self.filaments.iter().map(|f| f.r).fold(f64::INFINITY, f64::min);
        for a in 0..self.filaments.len() {
            for b in a + 1..self.filaments.len() {
                d = d.min(self.filaments[a].distance_to(&self.filaments[b]));
            }
        }
        d
    }

    /// Same filaments translated by `dz` along the axis.
    pub fn shifted_z(&self, dz: f64) -> Result<Self> {
        Self::new(
            self.filaments
                .iter()
                .map(|f| Filament { z: f.z + dz, ..*f })
                .collect(),
        )
    }
}

impl TryFrom<Vec<Filament>> for FilamentConfig {
    type Error = Error;
    fn try_from(v: Vec<Filament>) -> Result<Self> {
        FilamentConfig::new(v)
    }
}

impl From<FilamentConfig> for Vec<Filament> {
    fn from(c: FilamentConfig) -> Self {
        c.filaments
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_is_min_of_separation_and_radius() {
        let c = FilamentConfig::new(vec![
            Filament { alpha: 1.0, r: 1.5, z: 0.5 },
            Filament { alpha: 1.0, r: 1.5, z: -0.5 },
        ])
        .unwrap();
        assert_eq!(c.d(), 1.0);
        let c = FilamentConfig::single(2.0, 0.3, 0.0).unwrap();
        assert_eq!(c.d(), 0.3);
        assert_eq!(c.total_circulation(), 2.0);
    }

    #[test]
    fn rejects_invalid_filaments() {
        assert!(FilamentConfig::single(0.0, 1.0, 0.0).is_err());
        assert!(FilamentConfig::single(1.0, 0.0, 0.0).is_err());
        assert!(FilamentConfig::new(vec![]).is_err());
        let f = Filament { alpha: 1.0, r: 1.0, z: 0.0 };
        assert!(FilamentConfig::new(vec![f, f]).is_err());
    }
}
