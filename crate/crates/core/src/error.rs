use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The energy coincides with a segment height, so the local wavenumber vanishes.
    #[error("degenerate kinematics: energy {energy} coincides with segment height {height}")]
    DegenerateKinematics { energy: f64, height: f64 },

    #[error("zero wavenumber at interface")]
    ZeroWavenumber,

    #[error("energy must be positive and finite, got {0}")]
    NonPositiveEnergy(f64),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Denominator of the opaque-limit amplitude factor is too close to zero.
    #[error("near resonance: |denominator| = {denominator:e} below guard {guard:e}")]
    NearResonance { denominator: f64, guard: f64 },

    #[error("singular matching system")]
    SingularSystem,

    #[error("phase jump of {jump:.3} rad between stencil points; step {step:e} too large")]
    StepTooLarge { jump: f64, step: f64 },

    #[error("wavepacket scheme failure: {0}")]
    Scheme(String),

    #[error("transmitted fraction {0:e} below the detection floor")]
    InsufficientTransmission(f64),

    #[error("waveguide mapping: {0}")]
    Mapping(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
