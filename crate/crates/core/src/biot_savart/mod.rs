//! Velocity recovery `u = BS[omega]` through the Stokes stream function, and
//! a direct elliptic-integral quadrature used as an independent oracle.

mod boundary;
pub mod kernels;
mod multigrid;
mod quadrature;
mod solve;

pub use boundary::{BoundaryValues, FarField};
pub use multigrid::{SolveStats, StreamSolver};
pub use quadrature::direct_quadrature_velocity;
pub use solve::{
    interpolation_bound_check, solve_velocity, solve_velocity_with, velocity_from_stream, BiotSavart,
    BsSolveReport, StreamFunction, DEFAULT_TOL,
};
