//! Stationary scattering through sequences of rectangular barriers, tunneling
//! phase times, opaque-limit asymptotics and a time-domain wavepacket
//! propagator, with the sweep and reproduction harness used by the CLI.

pub mod asymptotics;
pub mod constants;
pub mod error;
pub mod harness;
pub mod kinematics;
pub mod matching;
pub mod numerics;
pub mod phase_time;
pub mod profile;
pub mod resonance;
pub mod scattering;
pub mod transfer;
pub mod wavepacket;

pub use asymptotics::{
    hartman_phase_time, opaque_amplitudes, resonance_condition, OpaqueLimitAmplitudes,
};
pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use kinematics::Kinematics;
pub use matching::{solve_double_barrier_direct, solve_matching_direct, MatchingCoefficients};
pub use phase_time::{phase_time, PhaseTimeConfig, PhaseTimeResult};
pub use profile::{DoubleBarrier, PotentialProfile, Segment};
pub use resonance::{resonance_scan, ResonanceFit, ScanConfig};
pub use scattering::{solve_scattering, transmission, Region, ScatteringSolution, Transmission};
pub use transfer::{interface_matrix, profile_matrix, propagation_matrix, TransferMatrix};
