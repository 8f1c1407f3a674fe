//! Time evolution: the linear semigroup, the frozen-velocity transport step
//! and the coupled per-filament stepper.

mod linear;
pub mod operators;
mod params;
pub mod staging;
mod state;

pub use linear::{advect_diffuse_mild, linear_step, max_gradient, LinearRun};
pub use params::{DiffusionMode, SolverParams};
pub use staging::{CoreBox, Staging};
pub use state::{gaussian, SimulationState, StepRecord};
