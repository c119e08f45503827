use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::PotentialProfile;

/// Smallest admissible grid.
pub const MIN_POINTS: usize = 1 << 10;

/// Uniform spatial grid and time step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dt: f64,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, dt: f64) -> Result<Self> {
        let g = Self {
            x_min,
            x_max,
            n_points,
            dt,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid covering the profile plus `lead` packet widths on each side with
    /// spacing at most `dx`.
    pub fn around_profile(
        profile: &PotentialProfile,
        sigma: f64,
        lead: f64,
        dx: f64,
        dt: f64,
    ) -> Result<Self> {
        let x_min = -lead * sigma;
        let x_max = profile.extent() + lead * sigma;
        let n = (((x_max - x_min) / dx).ceil() as usize + 1).max(MIN_POINTS);
        Self::new(x_min, x_max, n, dt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < MIN_POINTS {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {MIN_POINTS} points, got {}",
                self.n_points
            )));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(Error::InvalidArgument(format!(
                "grid bounds [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step {}", self.dt)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.x(i))
    }

    /// Whether `[−lead·σ, D + lead·σ]` fits inside the grid.
    pub fn has_lead_room(&self, profile: &PotentialProfile, sigma: f64, lead: f64) -> bool {
        self.x_min <= -lead * sigma && self.x_max >= profile.extent() + lead * sigma
    }
}

/// Discretized wavefunction at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct WavepacketState {
    pub grid: GridSpec,
    pub psi: Vec<Complex64>,
    pub t: f64,
    pub norm: f64,
    /// Norm removed by absorbing layers so far.
    pub absorbed: f64,
}

impl WavepacketState {
    pub fn new(grid: GridSpec, psi: Vec<Complex64>, t: f64) -> Result<Self> {
        grid.validate()?;
        if psi.len() != grid.n_points {
            return Err(Error::InvalidArgument(format!(
                "wavefunction has {} samples for a {}-point grid",
                psi.len(),
                grid.n_points
            )));
        }
        let mut s = Self {
            grid,
            psi,
            t,
            norm: 0.0,
            absorbed: 0.0,
        };
        s.norm = s.compute_norm();
        Ok(s)
    }

    pub fn compute_norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn density(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.psi
            .iter()
            .enumerate()
            .map(|(i, z)| (self.grid.x(i), z.norm_sqr()))
    }

    /// Probability in `[lo, hi)`.
    pub fn probability_between(&self, lo: f64, hi: f64) -> f64 {
        self.density()
            .filter(|&(x, _)| x >= lo && x < hi)
            .map(|(_, d)| d)
            .sum::<f64>()
            * self.grid.dx()
    }

    /// `⟨x⟩` and the standard deviation of `|ψ|²`.
    pub fn position_moments(&self) -> (f64, f64) {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (x, d) in self.density() {
            s0 += d;
            s1 += d * x;
            s2 += d * x * x;
        }
        let mean = s1 / s0;
        (mean, (s2 / s0 - mean * mean).max(0.0).sqrt())
    }

    /// Left half-maximum point of the density restricted to `x < x_limit`:
    /// the position of the trailing edge of an incident packet.
    pub fn trailing_half_max(&self, x_limit: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.density().take_while(|&(x, _)| x < x_limit).collect();
        let max = pts.iter().map(|p| p.1).fold(0.0, f64::max);
        if max == 0.0 {
            return None;
        }
        let half = 0.5 * max;
        let i = pts.iter().position(|p| p.1 >= half)?;
        if i == 0 {
            return Some(pts[0].0);
        }
        let (x0, d0) = pts[i - 1];
        let (x1, d1) = pts[i];
        Some(x0 + (half - d0) / (d1 - d0) * (x1 - x0))
    }

    pub fn budget(&self, profile: &PotentialProfile) -> NormBudget {
        let d = profile.extent();
        NormBudget {
            reflected: self.probability_between(f64::NEG_INFINITY, 0.0),
            inside: self.probability_between(0.0, d),
            transmitted: self.probability_between(d, f64::INFINITY),
            absorbed: self.absorbed,
        }
    }
}

/// Where the initial norm has gone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBudget {
    pub reflected: f64,
    pub inside: f64,
    pub transmitted: f64,
    pub absorbed: f64,
}

/// Unit-norm Gaussian `exp(−(x−x₀)²/(2σ²) + ik₀x)` left of a profile starting at `x = 0`.
pub fn init_gaussian(grid: GridSpec, x0: f64, k0: f64, sigma: f64) -> Result<WavepacketState> {
    grid.validate()?;
    if !(sigma.is_finite() && sigma > 0.0 && k0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sigma = {sigma}, k0 = {k0}"
        )));
    }
    if x0 + 5.0 * sigma > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "packet at x0 = {x0} with sigma = {sigma} overlaps the profile (needs x0 + 5 sigma <= 0)"
        )));
    }
    if x0 - 5.0 * sigma < grid.x_min {
        return Err(Error::InvalidArgument(format!(
            "packet at x0 = {x0} with sigma = {sigma} extends past the grid edge {}",
            grid.x_min
        )));
    }
    if sigma * k0.abs() < 10.0 {
        log::warn!(
            "sigma*k0 = {} < 10: packet is not quasi-monochromatic",
            sigma * k0.abs()
        );
    }
    let psi: Vec<Complex64> = grid
        .positions()
        .map(|x| {
            let u = (x - x0) / sigma;
            Complex64::from_polar((-0.5 * u * u).exp(), k0 * x)
        })
        .collect();
    let mut state = WavepacketState::new(grid, psi, 0.0)?;
    let scale = 1.0 / state.norm.sqrt();
    for z in &mut state.psi {
        *z *= scale;
    }
    state.norm = state.compute_norm();
    Ok(state)
}
