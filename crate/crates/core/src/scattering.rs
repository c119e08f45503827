//! Stationary scattering with unit-amplitude incidence from the left.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::kinematics::Kinematics;
use crate::matching::MatchingCoefficients;
use crate::profile::PotentialProfile;
use crate::transfer::{interface_matrix, profile_matrix, propagation_matrix, ScaledPair};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Plane-wave (or evanescent) coefficients of one region,
/// `ψ = forward·e^{iq(x−origin)} + backward·e^{−iq(x−origin)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub start: f64,
    pub end: f64,
    pub origin: f64,
    pub wavenumber: Complex64,
    pub forward: Complex64,
    pub backward: Complex64,
}

impl Region {
    pub fn psi(&self, x: f64) -> Complex64 {
        let p = I * self.wavenumber * (x - self.origin);
        self.forward * p.exp() + self.backward * (-p).exp()
    }

    pub fn dpsi(&self, x: f64) -> Complex64 {
        let p = I * self.wavenumber * (x - self.origin);
        I * self.wavenumber * (self.forward * p.exp() - self.backward * (-p).exp())
    }

    pub fn is_evanescent(&self) -> bool {
        self.wavenumber.re == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSolution {
    pub energy: f64,
    pub k: f64,
    pub constants: PhysicalConstants,
    /// Coefficient of `e^{−ikx}` in the left lead.
    pub reflection_amp: Complex64,
    /// Coefficient of `e^{ikx}` in the right lead (global origin). Underflows to
    /// zero for extremely opaque profiles; use the log/phase fields then.
    pub transmission_amp: Complex64,
    /// `ln |t|`.
    pub transmission_log_modulus: f64,
    /// `arg(t·e^{ikD})`, the transmission phase referenced to the right edge.
    pub transmission_phase: f64,
    /// Profile extent `D`.
    pub extent: f64,
    /// Left lead, every segment in order, right lead.
    pub regions: Vec<Region>,
}

impl ScatteringSolution {
    pub fn transmission_probability(&self) -> f64 {
        (2.0 * self.transmission_log_modulus).exp()
    }

    pub fn reflection_probability(&self) -> f64 {
        self.reflection_amp.norm_sqr()
    }

    /// `|R|² + |T|² − 1`.
    pub fn unitarity_defect(&self) -> f64 {
        self.reflection_probability() + self.transmission_probability() - 1.0
    }

    pub fn region_at(&self, x: f64) -> &Region {
        let n = self.regions.len();
        self.regions
            .iter()
            .take(n - 1)
            .find(|r| x < r.end)
            .unwrap_or(&self.regions[n - 1])
    }

    pub fn psi(&self, x: f64) -> Complex64 {
        self.region_at(x).psi(x)
    }

    pub fn dpsi(&self, x: f64) -> Complex64 {
        self.region_at(x).dpsi(x)
    }

    /// Largest relative mismatch of ψ and ψ′/|q| across all interfaces.
    pub fn continuity_defect(&self) -> f64 {
        self.regions
            .windows(2)
            .map(|w| {
                let x = w[0].end;
                let (l, r) = (&w[0], &w[1]);
                let scale = l.psi(x).norm().max(r.psi(x).norm()).max(f64::MIN_POSITIVE);
                let dscale = (l.dpsi(x).norm().max(r.dpsi(x).norm()))
                    .max(scale * l.wavenumber.norm().max(r.wavenumber.norm()));
                let e0 = (l.psi(x) - r.psi(x)).norm() / scale;
                let e1 = (l.dpsi(x) - r.dpsi(x)).norm() / dscale.max(f64::MIN_POSITIVE);
                e0.max(e1)
            })
            .fold(0.0, f64::max)
    }

    /// The eight amplitudes of the two-barrier wavefunction in the
    /// parametrization where regions III–V carry the common factor `A_T`.
    pub fn double_barrier_coefficients(&self) -> Result<MatchingCoefficients> {
        if self.regions.len() != 5 {
            return Err(Error::InvalidProfile(
                "two-barrier coefficients need a three-segment profile".into(),
            ));
        }
        let r = &self.regions;
        let (b1, well, b2) = (&r[1], &r[2], &r[3]);
        let k = self.k;
        let a = b1.end;
        let l = well.end;
        let trans1 = well.forward * (-I * k * a).exp();
        let refl2 = well.backward * (I * k * a).exp() / trans1;
        debug_assert!((b2.origin - l).abs() == 0.0);
        Ok(MatchingCoefficients {
            refl1: self.reflection_amp,
            trans1,
            alpha1: b1.forward,
            beta1: b1.backward,
            refl2,
            trans2: self.transmission_amp / trans1,
            alpha2: b2.forward / trans1,
            beta2: b2.backward / trans1,
        })
    }
}

/// Transmission data without the per-region coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transmission {
    pub log_modulus: f64,
    /// `arg(t·e^{ikD})`.
    pub phase: f64,
    pub reflection: Complex64,
}

impl Transmission {
    pub fn probability(&self) -> f64 {
        (2.0 * self.log_modulus).exp()
    }
}

/// Transmission through the whole profile from the composed transfer matrix.
pub fn transmission(
    profile: &PotentialProfile,
    constants: PhysicalConstants,
    energy: f64,
) -> Result<Transmission> {
    let kin = Kinematics::new(energy, constants)?;
    let m = profile_matrix(profile, &kin)?;
    let mm = m.mantissa();
    let m11 = mm[0][0];
    Ok(Transmission {
        log_modulus: -m.log_scale() - m11.norm().ln(),
        phase: (-m11.arg() + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)
            - std::f64::consts::PI,
        reflection: mm[1][0] / m11,
    })
}

/// Solves for all region coefficients by back-substitution from the right lead.
pub fn solve_scattering(
    profile: &PotentialProfile,
    constants: PhysicalConstants,
    energy: f64,
) -> Result<ScatteringSolution> {
    let kin = Kinematics::new(energy, constants)?;
    let lead = Complex64::new(kin.k, 0.0);
    let segs = profile.segments();
    let bounds = profile.boundaries();
    let extent = profile.extent();

    let qs = segs
        .iter()
        .map(|s| kin.local_wavenumber(s.height))
        .collect::<Result<Vec<_>>>()?;

    // Unnormalized pairs, right lead first, each referenced to its region origin.
    let mut pairs = Vec::with_capacity(segs.len() + 2);
    let mut pair = ScaledPair::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    pairs.push(pair);
    let mut right_q = lead;
    for (j, seg) in segs.iter().enumerate().rev() {
        let at_edge = interface_matrix(qs[j], right_q)?.apply(pair);
        pair = propagation_matrix(qs[j], seg.width)?.apply(at_edge);
        pairs.push(pair);
        right_q = qs[j];
    }
    let left = interface_matrix(lead, right_q)?.apply(pair);
    pairs.push(left);
    pairs.reverse();

    let a0 = left.v[0];
    if a0.norm() == 0.0 {
        return Err(Error::SingularSystem);
    }
    let s0 = left.log_scale;
    let region_of = |idx: usize| -> (f64, f64, f64, Complex64) {
        match idx {
            0 => (f64::NEG_INFINITY, 0.0, 0.0, lead),
            i if i == segs.len() + 1 => (extent, f64::INFINITY, extent, lead),
            i => (bounds[i - 1], bounds[i], bounds[i - 1], qs[i - 1]),
        }
    };
    let regions = pairs
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let [f, b] = p.to_unscaled(-s0);
            let (start, end, origin, q) = region_of(idx);
            Region {
                start,
                end,
                origin,
                wavenumber: q,
                forward: f / a0,
                backward: b / a0,
            }
        })
        .collect::<Vec<_>>();

    let log_modulus = -s0 - a0.norm().ln();
    let phase = -a0.arg();
    let transmission_amp = Complex64::from_polar(log_modulus.exp(), phase - kin.k * extent);
    Ok(ScatteringSolution {
        energy,
        k: kin.k,
        constants,
        reflection_amp: regions[0].backward,
        transmission_amp,
        transmission_log_modulus: log_modulus,
        transmission_phase: phase,
        extent,
        regions,
    })
}
