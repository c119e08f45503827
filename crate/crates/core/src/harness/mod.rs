//! Parameter sweeps, record emitters, the waveguide correspondence and the
//! reproduction checks.

pub mod records;
pub mod reproduce;
pub mod sweep;
pub mod waveguide;

pub use records::{format_number, Cell, Format, Table};
pub use reproduce::{reproduce, CheckOutcome, ReproduceReport};
pub use sweep::{
    run_sweep, run_sweep_with_jobs, SweepOutput, SweepRecord, SweepSpec, SweepTable, SweptParameter,
};
pub use waveguide::{waveguide_map, WaveguideMapping, WaveguideParams};
