//! Crank–Nicolson stepping `(1 + iHΔt/2ħ) ψⁿ⁺¹ = (1 − iHΔt/2ħ) ψⁿ` with the
//! three-point Laplacian and Dirichlet ends. The left-hand matrix is constant,
//! so its tridiagonal factorization is computed once.

use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::profile::PotentialProfile;

use super::grid::{GridSpec, WavepacketState};

/// Norm drift tolerated with absorbers off before the run is declared unstable.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Imaginary potential `−iW(x)` ramping polynomially over the outer part of the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Absorber {
    /// Fraction of the grid length covered on each side.
    pub fraction: f64,
    /// `W` at the grid edge.
    pub strength: f64,
    pub power: i32,
}

impl Absorber {
    pub fn new(strength: f64) -> Self {
        Self {
            fraction: 0.1,
            strength,
            power: 2,
        }
    }

    fn at(&self, grid: &GridSpec, x: f64) -> f64 {
        let width = self.fraction * (grid.x_max - grid.x_min);
        if width <= 0.0 {
            return 0.0;
        }
        let depth = ((grid.x_min + width - x).max(0.0)).max((x - (grid.x_max - width)).max(0.0));
        self.strength * (depth / width).powi(self.power)
    }
}

pub struct CrankNicolson {
    grid: GridSpec,
    dt: f64,
    absorbing: bool,
    rhs_diag: Vec<Complex64>,
    rhs_off: Complex64,
    lhs_off: Complex64,
    cprime: Vec<Complex64>,
    inv_denom: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl CrankNicolson {
    pub fn new(
        grid: GridSpec,
        profile: &PotentialProfile,
        constants: PhysicalConstants,
        absorber: Option<Absorber>,
    ) -> Result<Self> {
        grid.validate()?;
        constants.validate()?;
        let n = grid.n_points;
        let dx = grid.dx();
        let kinetic = constants.hbar * constants.hbar / (2.0 * constants.mass * dx * dx);
        // i Δt / 2ħ
        let f = Complex64::new(0.0, grid.dt / (2.0 * constants.hbar));

        let h_diag: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = grid.x(i);
                let v = profile.average_potential(x - 0.5 * dx, x + 0.5 * dx);
                let w = absorber.map_or(0.0, |a| a.at(&grid, x));
                Complex64::new(2.0 * kinetic + v, -w)
            })
            .collect();
        let h_off = Complex64::new(-kinetic, 0.0);

        let lhs_off = f * h_off;
        let rhs_off = -f * h_off;
        let rhs_diag: Vec<Complex64> = h_diag.iter().map(|&h| 1.0 - f * h).collect();

        let mut cprime = vec![Complex64::new(0.0, 0.0); n];
        let mut inv_denom = vec![Complex64::new(0.0, 0.0); n];
        let mut prev_c = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let b = 1.0 + f * h_diag[i];
            let den = b - lhs_off * prev_c;
            if den.norm() == 0.0 {
                return Err(Error::Scheme("singular tridiagonal system".into()));
            }
            inv_denom[i] = 1.0 / den;
            cprime[i] = lhs_off * inv_denom[i];
            prev_c = cprime[i];
        }
        Ok(Self {
            grid,
            dt: grid.dt,
            absorbing: absorber.is_some(),
            rhs_diag,
            rhs_off,
            lhs_off,
            cprime,
            inv_denom,
            scratch: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn step(&mut self, state: &mut WavepacketState) {
        let psi = &mut state.psi;
        let n = psi.len();
        let d = &mut self.scratch;
        // Right-hand side fused with the forward sweep.
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let left = if i > 0 {
                psi[i - 1]
            } else {
                Complex64::new(0.0, 0.0)
            };
            let right = if i + 1 < n {
                psi[i + 1]
            } else {
                Complex64::new(0.0, 0.0)
            };
            let r = self.rhs_diag[i] * psi[i] + self.rhs_off * (left + right);
            prev = (r - self.lhs_off * prev) * self.inv_denom[i];
            d[i] = prev;
        }
        psi[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            psi[i] = d[i] - self.cprime[i] * psi[i + 1];
        }
        state.t += self.dt;
        if self.absorbing {
            let before = state.norm;
            state.norm = state.compute_norm();
            state.absorbed += (before - state.norm).max(0.0);
        }
    }

    /// Steps `n_steps` times, calling `observe` after every step.
    pub fn run(
        &mut self,
        state: &mut WavepacketState,
        n_steps: usize,
        mut observe: impl FnMut(&WavepacketState),
    ) {
        for _ in 0..n_steps {
            self.step(state);
            observe(state);
        }
        if !self.absorbing {
            state.norm = state.compute_norm();
        }
    }
}

/// Propagates `state` through `profile` for `n_steps` without absorbers and
/// checks norm conservation.
pub fn evolve(
    state: WavepacketState,
    profile: &PotentialProfile,
    constants: PhysicalConstants,
    n_steps: usize,
) -> Result<WavepacketState> {
    let mut state = state;
    let start = state.compute_norm();
    let mut cn = CrankNicolson::new(state.grid, profile, constants, None)?;
    cn.run(&mut state, n_steps, |_| {});
    let drift = (state.norm - start).abs();
    if !drift.is_finite() || drift > NORM_DRIFT_LIMIT * start {
        return Err(Error::Scheme(format!(
            "norm drift {drift:e} after {n_steps} steps"
        )));
    }
    Ok(state)
}
