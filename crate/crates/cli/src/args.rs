use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tunneltime_core::harness::sweep::SweepOutput;
use tunneltime_core::harness::Format;

#[derive(Debug, Parser)]
#[command(
    name = "tunneltime",
    version,
    about = "Tunneling phase times through rectangular barrier sequences"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// `natural`: ħ = m = 1. `si`: eV, nm and fs with the electron mass.
    #[arg(long, global = true, value_enum, default_value_t = Units::Natural)]
    pub units: Units,
    /// Multiplies the particle mass (effective-mass materials).
    #[arg(long, global = true)]
    pub mass_ratio: Option<f64>,
    /// Worker threads for parallel sweeps and checks.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for randomized property checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Normalized cavity detuning below which points are flagged near-resonant.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Units {
    Natural,
    Si,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputArg {
    PhaseTime,
    Transmission,
    Resonances,
    WavepacketArrival,
}

impl From<OutputArg> for SweepOutput {
    fn from(o: OutputArg) -> Self {
        match o {
            OutputArg::PhaseTime => SweepOutput::PhaseTime,
            OutputArg::Transmission => SweepOutput::Transmission,
            OutputArg::Resonances => SweepOutput::Resonances,
            OutputArg::WavepacketArrival => SweepOutput::WavepacketArrival,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reflection and transmission amplitudes at one energy.
    Scatter {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        energy: f64,
    },
    /// Phase time at one energy or over an energy grid.
    PhaseTime {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, conflicts_with = "range")]
        energy: Option<f64>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Run a sweep spec file.
    Sweep { spec: PathBuf },
    /// Locate transmission resonances and fit their delay lines.
    Resonances {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        range: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        points: usize,
    },
    /// Propagate a Gaussian packet through the profile and time its arrival.
    Wavepacket(WavepacketArgs),
    /// Map a waveguide with undersized sections to a barrier profile.
    Waveguide {
        params: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [OutputArg::PhaseTime, OutputArg::Transmission])]
        outputs: Vec<OutputArg>,
    },
    /// Run the reference check suite; exits nonzero if any check fails.
    Reproduce,
}

#[derive(Debug, Args)]
pub struct WavepacketArgs {
    #[arg(long)]
    pub profile: PathBuf,
    /// Carrier energy.
    #[arg(long)]
    pub energy: f64,
    /// Packet width in units of 1/k0.
    #[arg(long, default_value_t = 50.0)]
    pub sigma_k0: f64,
    /// Grid spacing in units of 1/k0.
    #[arg(long)]
    pub dx_k0: Option<f64>,
    /// Time step in units of m/(ħk0²).
    #[arg(long)]
    pub dt_k0_squared: Option<f64>,
    /// Detector distance beyond the profile's right edge, in units of 1/k0.
    #[arg(long)]
    pub detector_offset_k0: Option<f64>,
    /// Enable absorbing layers of this strength.
    #[arg(long)]
    pub absorber: Option<f64>,
    /// Dump |ψ|² snapshots to this file.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub frame_every: usize,
    #[arg(long, default_value_t = 4)]
    pub frame_stride: usize,
}
