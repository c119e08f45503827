use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::profile::PotentialProfile;

use super::grid::{init_gaussian, GridSpec, NormBudget, WavepacketState, MIN_POINTS};
use super::propagator::{Absorber, CrankNicolson};

/// Transmitted signal below this fraction of the initial norm is treated as noise.
pub const TRANSMISSION_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrivalRecord {
    pub detector_x: f64,
    /// Time of maximum `|ψ(detector)|²`.
    pub t_peak: f64,
    /// Time centroid of the probability current through the detector.
    pub t_centroid: f64,
    pub transmitted_fraction: f64,
}

/// Time series of `ψ` at a fixed position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DetectorTrace {
    pub x: f64,
    pub times: Vec<f64>,
    pub density: Vec<f64>,
    pub current: Vec<f64>,
    hbar_over_m: f64,
}

impl DetectorTrace {
    pub fn new(x: f64, constants: PhysicalConstants) -> Self {
        Self {
            x,
            hbar_over_m: constants.hbar / constants.mass,
            ..Default::default()
        }
    }

    /// Samples the state by linear interpolation between the bracketing nodes.
    pub fn record(&mut self, state: &WavepacketState) {
        let g = &state.grid;
        let dx = g.dx();
        let s = ((self.x - g.x_min) / dx).clamp(0.0, (g.n_points - 2) as f64);
        let i = s.floor() as usize;
        let f = s - i as f64;
        let (a, b) = (state.psi[i], state.psi[i + 1]);
        let psi: Complex64 = a * (1.0 - f) + b * f;
        let dpsi = (b - a) / dx;
        self.times.push(state.t);
        self.density.push(psi.norm_sqr());
        self.current.push(self.hbar_over_m * (psi.conj() * dpsi).im);
    }

    pub fn arrival(&self) -> Result<ArrivalRecord> {
        let n = self.times.len();
        if n < 3 {
            return Err(Error::InvalidArgument(
                "detector trace needs at least 3 samples".into(),
            ));
        }
        let mut flux = 0.0;
        let mut moment = 0.0;
        for i in 1..n {
            let dt = self.times[i] - self.times[i - 1];
            flux += 0.5 * dt * (self.current[i] + self.current[i - 1]);
            moment += 0.5
                * dt
                * (self.times[i] * self.current[i] + self.times[i - 1] * self.current[i - 1]);
        }
        if flux.is_nan() || flux < TRANSMISSION_FLOOR {
            return Err(Error::InsufficientTransmission(flux));
        }
        let imax = self
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if imax == 0 || imax == n - 1 {
            return Err(Error::Scheme(
                "transmitted peak not inside the simulation horizon".into(),
            ));
        }
        let (y0, y1, y2) = (
            self.density[imax - 1],
            self.density[imax],
            self.density[imax + 1],
        );
        let curv = y0 - 2.0 * y1 + y2;
        let shift = if curv != 0.0 {
            0.5 * (y0 - y2) / curv
        } else {
            0.0
        };
        let h = self.times[imax + 1] - self.times[imax];
        Ok(ArrivalRecord {
            detector_x: self.x,
            t_peak: self.times[imax] + shift * h,
            t_centroid: moment / flux,
            transmitted_fraction: flux,
        })
    }
}

/// Arrival record from a sequence of stored states.
pub fn measure_arrival(
    history: &[WavepacketState],
    detector_x: f64,
    constants: PhysicalConstants,
) -> Result<ArrivalRecord> {
    let mut trace = DetectorTrace::new(detector_x, constants);
    for s in history {
        trace.record(s);
    }
    trace.arrival()
}

/// Parameters of a single transmission experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub k0: f64,
    pub sigma: f64,
    /// Initial centre at `−start_offset·σ`.
    pub start_offset: f64,
    /// Detector placed this far beyond the profile's right edge.
    pub detector_offset: f64,
    /// Free room beyond the initial packet centre and beyond the detector, in units of σ.
    pub lead: f64,
    pub dx: f64,
    pub dt: f64,
    /// Run until the free-flight centre is this many σ past the detector.
    pub horizon: f64,
    /// Absorbing-layer strength, `None` for a closed box.
    pub absorber: Option<f64>,
}

impl PacketSpec {
    /// Packet with `σ = sigma_k0 / k0` and grid resolution tied to the carrier.
    pub fn with_bandwidth(k0: f64, sigma_k0: f64) -> Self {
        Self {
            k0,
            sigma: sigma_k0 / k0,
            start_offset: 6.0,
            detector_offset: 10.0 / k0,
            lead: 10.0,
            dx: 0.05 / k0,
            dt: 0.02 / (k0 * k0),
            horizon: 6.0,
            absorber: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ArrivalRun {
    pub record: ArrivalRecord,
    pub budget: NormBudget,
    pub steps: usize,
    pub final_state: WavepacketState,
}

/// Launches a packet at the profile, records the detector trace and returns
/// the arrival record plus the final norm budget.
pub fn simulate_arrival(
    profile: &PotentialProfile,
    constants: PhysicalConstants,
    spec: &PacketSpec,
) -> Result<ArrivalRun> {
    simulate_arrival_observed(profile, constants, spec, |_| {})
}

/// `simulate_arrival` that also hands every state (including the initial one) to `observe`.
pub fn simulate_arrival_observed(
    profile: &PotentialProfile,
    constants: PhysicalConstants,
    spec: &PacketSpec,
    mut observe: impl FnMut(&WavepacketState),
) -> Result<ArrivalRun> {
    let x0 = -spec.start_offset * spec.sigma;
    let detector_x = profile.extent() + spec.detector_offset;
    let x_min = x0 - spec.lead * spec.sigma;
    let x_max = detector_x + spec.lead * spec.sigma;
    let n = (((x_max - x_min) / spec.dx).ceil() as usize + 1).max(MIN_POINTS);
    let grid = GridSpec::new(x_min, x_max, n, spec.dt)?;
    let mut state = init_gaussian(grid, x0, spec.k0, spec.sigma)?;

    let absorber = spec.absorber.map(Absorber::new);
    if let Some(a) = absorber {
        let inner = grid.x_max - a.fraction * (grid.x_max - grid.x_min);
        if detector_x >= inner {
            return Err(Error::InvalidArgument(
                "detector inside the absorbing layer".into(),
            ));
        }
    }
    let v = constants.velocity(spec.k0);
    let t_flight = (detector_x - x0) / v;
    let spread = constants.hbar * t_flight / (constants.mass * spec.sigma * spec.sigma);
    let width = spec.sigma * (1.0 + spread * spread).sqrt();
    let t_end = t_flight + spec.horizon * width / v;
    let steps = (t_end / spec.dt).ceil() as usize;

    let mut cn = CrankNicolson::new(grid, profile, constants, absorber)?;
    let mut trace = DetectorTrace::new(detector_x, constants);
    trace.record(&state);
    observe(&state);
    cn.run(&mut state, steps, |s| {
        trace.record(s);
        observe(s);
    });
    let record = trace.arrival()?;
    Ok(ArrivalRun {
        record,
        budget: state.budget(profile),
        steps,
        final_state: state,
    })
}
