//! Numerical laboratory for the axisymmetric, swirl-free Navier-Stokes
//! vorticity equation on the half-plane {(r, z) : r > 0} with vortex-filament
//! initial data.
//!
//! The crate is organised bottom-up:
//!
//! * [`domain_fields`]: grids, fields, norms and the filament configuration.
//! * [`biot_savart`]: velocity recovery from vorticity and its quadrature oracle.
//! * [`dynamics`]: the linear semigroup, the nonlinear stepper and per-filament
//!   co-evolution on staged grids.
//! * [`selfsim`]: self-similar frames, the Oseen profile and weighted energies.
//! * [`harness`]: experiments, run ledgers, configuration files and reports.

pub mod biot_savart;
pub mod domain_fields;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod harness;
pub mod selfsim;

pub use error::{Error, Result};
