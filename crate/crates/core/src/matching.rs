//! Direct solution of the eight matching conditions of the two-barrier problem.
//!
//! Regions: I `x ≤ 0`, II `[0, a]`, III `[a, L]`, IV `[L, L+a]`, V `x ≥ L+a`:
//!
//! ```text
//! ψ_I   = e^{ikx} + R₁ e^{−ikx}
//! ψ_II  = α₁ e^{−χx} + β₁ e^{χx}
//! ψ_III = T₁ [e^{ikx} + R₂ e^{−ikx}]
//! ψ_IV  = T₁ [α₂ e^{−χ(x−L)} + β₂ e^{χ(x−L)}]
//! ψ_V   = T₁ T₂ e^{ikx}
//! ```
//!
//! Continuity of ψ and ψ′ at `0, a, L, L+a` is linear in
//! `(R₁, T₁, α₁, β₁, T₁R₂, T₁α₂, T₁β₂, T₁T₂)`; the system is solved with LU and
//! the products are divided by `T₁` afterwards. This path shares nothing with
//! the transfer-matrix solver and serves as its oracle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::kinematics::Kinematics;
use crate::profile::{DoubleBarrier, PotentialProfile};
use crate::scattering::{Region, ScatteringSolution};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingCoefficients {
    pub refl1: Complex64,
    pub trans1: Complex64,
    pub alpha1: Complex64,
    pub beta1: Complex64,
    pub refl2: Complex64,
    pub trans2: Complex64,
    pub alpha2: Complex64,
    pub beta2: Complex64,
}

impl MatchingCoefficients {
    pub fn as_array(&self) -> [Complex64; 8] {
        [
            self.refl1,
            self.trans1,
            self.alpha1,
            self.beta1,
            self.refl2,
            self.trans2,
            self.alpha2,
            self.beta2,
        ]
    }

    pub const NAMES: [&'static str; 8] = [
        "refl1", "trans1", "alpha1", "beta1", "refl2", "trans2", "alpha2", "beta2",
    ];

    /// Total transmission amplitude `T₁T₂` (global origin).
    pub fn transmission(&self) -> Complex64 {
        self.trans1 * self.trans2
    }

    /// Largest coefficient-wise relative difference.
    pub fn max_relative_difference(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(a, b)| (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// Solves the two-barrier matching conditions as an 8×8 complex linear system.
pub fn solve_double_barrier_direct(
    geometry: &DoubleBarrier,
    constants: PhysicalConstants,
    energy: f64,
) -> Result<MatchingCoefficients> {
    let kin = Kinematics::new(energy, constants)?;
    let q = kin.local_wavenumber(geometry.height)?;
    let k = kin.k;
    let ik = I * k;
    let a = geometry.width;
    let l = geometry.l();
    // `iq` is −χ for a barrier, so e^{iqx} is the decaying solution; writing
    // the system in terms of `q` also covers heights below the energy.
    let iq = I * q;
    let ex = |z: Complex64| z.exp();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);

    // Unknowns: R1, T1, a1, b1, T1R2, T1a2, T1b2, T1T2.
    #[rustfmt::skip]
    let rows: [[Complex64; 8]; 8] = [
        // ψ(0): 1 + R1 = a1 + b1
        [-one, zero, one, one, zero, zero, zero, zero],
        // ψ′(0): ik(1 − R1) = iq(a1 − b1)
        [ik, zero, iq, -iq, zero, zero, zero, zero],
        // ψ(a)
        [zero, -ex(ik * a), ex(iq * a), ex(-iq * a), -ex(-ik * a), zero, zero, zero],
        // ψ′(a)
        [zero, -ik * ex(ik * a), iq * ex(iq * a), -iq * ex(-iq * a), ik * ex(-ik * a), zero, zero, zero],
        // ψ(L)
        [zero, ex(ik * l), zero, zero, ex(-ik * l), -one, -one, zero],
        // ψ′(L)
        [zero, ik * ex(ik * l), zero, zero, -ik * ex(-ik * l), -iq, iq, zero],
        // ψ(L+a)
        [zero, zero, zero, zero, zero, ex(iq * a), ex(-iq * a), -ex(ik * (l + a))],
        // ψ′(L+a)
        [zero, zero, zero, zero, zero, iq * ex(iq * a), -iq * ex(-iq * a), -ik * ex(ik * (l + a))],
    ];
    let rhs = [one, ik, zero, zero, zero, zero, zero, zero];

    let m = DMatrix::from_fn(8, 8, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(&rhs);
    let x = m.lu().solve(&b).ok_or(Error::SingularSystem)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let t1 = x[1];
    if t1.norm() == 0.0 {
        return Err(Error::SingularSystem);
    }
    Ok(MatchingCoefficients {
        refl1: x[0],
        trans1: t1,
        alpha1: x[2],
        beta1: x[3],
        refl2: x[4] / t1,
        alpha2: x[5] / t1,
        beta2: x[6] / t1,
        trans2: x[7] / t1,
    })
}

/// Direct matching solve for a barrier/gap/barrier profile, returned in the
/// same form as the transfer-matrix solver.
pub fn solve_matching_direct(
    profile: &PotentialProfile,
    constants: PhysicalConstants,
    energy: f64,
) -> Result<ScatteringSolution> {
    let geometry = DoubleBarrier::from_profile(profile)?;
    let c = solve_double_barrier_direct(&geometry, constants, energy)?;
    let kin = Kinematics::new(energy, constants)?;
    let k = kin.k;
    let lead = Complex64::new(k, 0.0);
    let q = kin.local_wavenumber(geometry.height)?;
    let a = geometry.width;
    let l = geometry.l();
    let d = geometry.extent();
    let t = c.transmission();

    let regions = vec![
        Region {
            start: f64::NEG_INFINITY,
            end: 0.0,
            origin: 0.0,
            wavenumber: lead,
            forward: Complex64::new(1.0, 0.0),
            backward: c.refl1,
        },
        Region {
            start: 0.0,
            end: a,
            origin: 0.0,
            wavenumber: q,
            forward: c.alpha1,
            backward: c.beta1,
        },
        Region {
            start: a,
            end: l,
            origin: a,
            wavenumber: lead,
            forward: c.trans1 * (I * k * a).exp(),
            backward: c.trans1 * c.refl2 * (-I * k * a).exp(),
        },
        Region {
            start: l,
            end: d,
            origin: l,
            wavenumber: q,
            forward: c.trans1 * c.alpha2,
            backward: c.trans1 * c.beta2,
        },
        Region {
            start: d,
            end: f64::INFINITY,
            origin: d,
            wavenumber: lead,
            forward: t * (I * k * d).exp(),
            backward: Complex64::new(0.0, 0.0),
        },
    ];
    Ok(ScatteringSolution {
        energy,
        k,
        constants,
        reflection_amp: c.refl1,
        transmission_amp: t,
        transmission_log_modulus: t.norm().ln(),
        transmission_phase: (t * (I * k * d).exp()).arg(),
        extent: d,
        regions,
    })
}
