use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;
/// Electron rest energy in eV.
pub const ELECTRON_REST_ENERGY_EV: f64 = 510_998.950_00;
/// Speed of light in nm/fs.
pub const LIGHT_SPEED_NM_FS: f64 = 299.792_458;
/// Speed of light in m/s.
pub const LIGHT_SPEED_M_S: f64 = 299_792_458.0;

/// Action and mass scale of the Schrödinger equation.
///
/// The default is natural units, `hbar = mass = 1`, in which `E = k²/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        let c = Self { hbar, mass };
        c.validate()?;
        Ok(c)
    }

    pub const fn natural() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }

    /// Electron in laboratory units: energies in eV, lengths in nm, times in fs.
    pub fn electron() -> Self {
        Self {
            hbar: HBAR_EV_FS,
            mass: ELECTRON_REST_ENERGY_EV / (LIGHT_SPEED_NM_FS * LIGHT_SPEED_NM_FS),
        }
    }

    /// Same action scale, mass multiplied by `ratio` (effective-mass materials).
    pub fn with_mass_ratio(self, ratio: f64) -> Result<Self> {
        Self::new(self.hbar, self.mass * ratio)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::InvalidConstants(format!("hbar = {}", self.hbar)));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidConstants(format!("mass = {}", self.mass)));
        }
        Ok(())
    }

    /// `2m/ħ²`, the factor converting energies into squared wavenumbers.
    #[inline]
    pub fn energy_to_k2(&self) -> f64 {
        2.0 * self.mass / (self.hbar * self.hbar)
    }

    #[inline]
    pub fn wavenumber(&self, energy: f64) -> f64 {
        (self.energy_to_k2() * energy).sqrt()
    }

    #[inline]
    pub fn energy_of(&self, k: f64) -> f64 {
        k * k / self.energy_to_k2()
    }

    #[inline]
    pub fn velocity(&self, k: f64) -> f64 {
        self.hbar * k / self.mass
    }
}
