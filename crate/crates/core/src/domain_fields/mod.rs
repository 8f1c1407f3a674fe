//! Discretised half-plane, scalar and vector fields, the filament
//! configuration and all norms and integrals used by the diagnostics.

mod config;
mod field;
mod grid;
mod norms;

pub use config::{Filament, FilamentConfig};
pub use field::{ScalarField, VectorField};
pub use grid::{Geometry, Grid};
pub use norms::{gaussian_weight, integral, lp_norm, oseen, oseen_profile, weighted_l2};
pub(crate) use norms::check_frame_cutoff;
