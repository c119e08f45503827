//! Time-domain cross-check: Gaussian packets propagated through a profile with
//! a Crank–Nicolson scheme, and arrival times measured at a detector.

mod arrival;
mod diagnostics;
mod frames;
mod grid;
mod propagator;
mod spectral;

pub use arrival::{
    measure_arrival, simulate_arrival, simulate_arrival_observed, ArrivalRecord, ArrivalRun,
    DetectorTrace, PacketSpec, TRANSMISSION_FLOOR,
};
pub use diagnostics::{tail_advancement, trailing_half_max};
pub use frames::FrameWriter;
pub use grid::{init_gaussian, GridSpec, NormBudget, WavepacketState, MIN_POINTS};
pub use propagator::{evolve, Absorber, CrankNicolson, NORM_DRIFT_LIMIT};
pub use spectral::{kinetic_energy_spectral, mean_momentum_spectral};
