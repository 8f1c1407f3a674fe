//! Self-similar variables around each filament: rescaled frames, the cutoff
//! background `f_0`, and the weighted energies of the perturbation.

mod cutoff;
mod energy;
mod frame;

pub use cutoff::{background_f0, chi};
pub use energy::{
    bridge, difference_energies, energies, oseen_distance, perturbation_energies, Bridge, EnergyReport,
    FilamentEnergy, DEFAULT_CUTOFF,
};
pub use frame::{FrameProjector, RescaledFrame};
