use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Relative window around a segment height inside which an energy is rejected.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Wavenumbers of a particle of fixed energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kinematics {
    pub energy: f64,
    pub k: f64,
    pub constants: PhysicalConstants,
}

impl Kinematics {
    pub fn new(energy: f64, constants: PhysicalConstants) -> Result<Self> {
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::NonPositiveEnergy(energy));
        }
        constants.validate()?;
        Ok(Self {
            energy,
            k: constants.wavenumber(energy),
            constants,
        })
    }

    pub fn velocity(&self) -> f64 {
        self.constants.velocity(self.k)
    }

    /// Decay constant inside a segment of height `height`, `None` unless `height > E`.
    pub fn chi(&self, height: f64) -> Option<f64> {
        (height > self.energy)
            .then(|| (self.constants.energy_to_k2() * (height - self.energy)).sqrt())
    }

    pub fn is_degenerate(&self, height: f64) -> bool {
        (self.energy - height).abs() <= DEGENERACY_TOLERANCE * self.energy.max(height.abs())
    }

    /// Local complex wavenumber `q` with `ψ ~ e^{±iqx}`: real above the segment
    /// height, `iχ` below it.
    pub fn local_wavenumber(&self, height: f64) -> Result<Complex64> {
        if self.is_degenerate(height) {
            return Err(Error::DegenerateKinematics {
                energy: self.energy,
                height,
            });
        }
        let q2 = self.constants.energy_to_k2() * (self.energy - height);
        Ok(if q2 > 0.0 {
            Complex64::new(q2.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-q2).sqrt())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_roundtrip() {
        for &c in &[PhysicalConstants::natural(), PhysicalConstants::electron()] {
            for &e in &[1e-3, 0.5, 2.0, 17.3] {
                let kin = Kinematics::new(e, c).unwrap();
                let back = c.hbar * c.hbar * kin.k * kin.k / (2.0 * c.mass);
                assert!((back - e).abs() <= 4.0 * f64::EPSILON * e);
            }
        }
    }

    #[test]
    fn chi_sign() {
        let kin = Kinematics::new(0.5, PhysicalConstants::natural()).unwrap();
        assert_eq!(kin.k, 1.0);
        assert_eq!(kin.chi(1.0), Some(1.0));
        assert_eq!(kin.chi(0.25), None);
        let q = kin.local_wavenumber(1.0).unwrap();
        assert_eq!(q, Complex64::new(0.0, 1.0));
        assert!(kin.local_wavenumber(0.5).is_err());
        assert!(Kinematics::new(0.0, PhysicalConstants::natural()).is_err());
        assert!(Kinematics::new(-1.0, PhysicalConstants::natural()).is_err());
    }
}
