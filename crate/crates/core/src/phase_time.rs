//! Phase time `τ = ħ ∂/∂E arg[t(E) e^{ikD}]` by numerical differentiation of the
//! unwrapped transmission phase.
//!
//! The derivative uses a 5-point central stencil at steps `h, h/2, …` combined
//! by Richardson extrapolation (error terms `h⁴, h⁶, …`).

use serde::{Deserialize, Serialize};

use crate::asymptotics::resonance_condition_asymmetric;
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::kinematics::Kinematics;
use crate::numerics::nearest_branch;
use crate::profile::PotentialProfile;
use crate::scattering::transmission;

/// Default `|resonance function| / (k(χ₁+χ₂))` below which a point counts as near a resonance.
pub const FAR_FROM_RESONANCE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseTimeConfig {
    /// Initial step relative to the energy.
    pub rel_step: f64,
    /// Smallest absolute step tried before giving up.
    pub min_step: f64,
    /// Largest absolute step allowed.
    pub max_step: f64,
    pub richardson_levels: usize,
    /// Threshold for `resonance_flag`.
    pub resonance_threshold: f64,
    /// Largest phase change tolerated between adjacent stencil points.
    pub max_phase_jump: f64,
}

impl Default for PhaseTimeConfig {
    fn default() -> Self {
        Self {
            rel_step: 1e-4,
            min_step: 1e-14,
            max_step: f64::INFINITY,
            richardson_levels: 2,
            resonance_threshold: FAR_FROM_RESONANCE,
            max_phase_jump: std::f64::consts::FRAC_PI_2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimeResult {
    pub energy: f64,
    pub tau: f64,
    /// Extent `D` of the `e^{ikD}` reference factor.
    pub reference_length: f64,
    pub step_used: f64,
    /// Difference between the two highest Richardson estimates.
    pub error_estimate: f64,
    pub resonance_flag: bool,
}

/// Smallest normalized cavity detuning over all wells bounded by two
/// classically forbidden segments, `None` if the profile has no such well.
///
/// For each well the resonance function of the two flanking barriers is
/// divided by `k(χ₁+χ₂)`, so it reads `cos(k·gap)` at `k = χ₁ = χ₂`.
pub fn cavity_detuning(
    profile: &PotentialProfile,
    constants: PhysicalConstants,
    energy: f64,
) -> Option<f64> {
    let kin = Kinematics::new(energy, constants).ok()?;
    let segs = profile.segments();
    segs.windows(3)
        .filter_map(|w| {
            let chi_l = kin.chi(w[0].height)?;
            let chi_r = kin.chi(w[2].height)?;
            if w[1].height >= energy {
                return None;
            }
            let q = constants.wavenumber(energy - w[1].height);
            let rc = resonance_condition_asymmetric(q, chi_l, chi_r, w[1].width);
            Some((rc / (q * (chi_l + chi_r))).abs())
        })
        .reduce(f64::min)
}

pub fn phase_time(
    profile: &PotentialProfile,
    constants: PhysicalConstants,
    energy: f64,
) -> Result<PhaseTimeResult> {
    phase_time_with(profile, constants, energy, &PhaseTimeConfig::default())
}

pub fn phase_time_with(
    profile: &PotentialProfile,
    constants: PhysicalConstants,
    energy: f64,
    config: &PhaseTimeConfig,
) -> Result<PhaseTimeResult> {
    let kin = Kinematics::new(energy, constants)?;
    for s in profile.segments() {
        kin.local_wavenumber(s.height)?;
    }
    // Keep the widest stencil (±2h) inside (0, ∞) and clear of every height.
    let clearance = profile
        .segments()
        .iter()
        .map(|s| (s.height - energy).abs())
        .fold(energy, f64::min);
    let mut h = (config.rel_step * energy)
        .min(config.max_step)
        .min(0.25 * clearance);
    if h < config.min_step {
        let height = profile
            .segments()
            .iter()
            .map(|s| s.height)
            .min_by(|a, b| (a - energy).abs().total_cmp(&(b - energy).abs()))
            .unwrap_or(0.0);
        return Err(Error::DegenerateKinematics { energy, height });
    }

    let levels = config.richardson_levels;
    loop {
        match stencil_derivative(profile, constants, energy, h, levels, config.max_phase_jump) {
            Ok((d, err, energies)) => {
                let resonance_flag = energies.iter().any(|&e| {
                    cavity_detuning(profile, constants, e)
                        .is_some_and(|x| x < config.resonance_threshold)
                });
                return Ok(PhaseTimeResult {
                    energy,
                    tau: constants.hbar * d,
                    reference_length: profile.extent(),
                    step_used: h,
                    error_estimate: constants.hbar * err,
                    resonance_flag,
                });
            }
            Err(Error::StepTooLarge { jump, step }) => {
                h *= 0.25;
                if h < config.min_step {
                    return Err(Error::StepTooLarge { jump, step });
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Richardson-extrapolated derivative of the unwrapped phase, its error
/// estimate and the stencil energies.
fn stencil_derivative(
    profile: &PotentialProfile,
    constants: PhysicalConstants,
    energy: f64,
    h: f64,
    levels: usize,
    max_jump: f64,
) -> Result<(f64, f64, Vec<f64>)> {
    // Offsets in units of h/2^levels so they are exact integers.
    let unit = h / f64::from(1u32 << levels);
    let mut offsets: Vec<i64> = (0..=levels)
        .flat_map(|j| {
            let s = 1i64 << (levels - j);
            [-2 * s, -s, s, 2 * s]
        })
        .chain(std::iter::once(0))
        .collect();
    offsets.sort_unstable();
    offsets.dedup();

    let energies: Vec<f64> = offsets.iter().map(|&o| energy + o as f64 * unit).collect();
    let raw = energies
        .iter()
        .map(|&e| transmission(profile, constants, e).map(|t| t.phase))
        .collect::<Result<Vec<_>>>()?;

    let center = offsets
        .iter()
        .position(|&o| o == 0)
        .expect("centre present");
    let mut phase = raw.clone();
    for i in center + 1..phase.len() {
        phase[i] = nearest_branch(raw[i], phase[i - 1]);
    }
    for i in (0..center).rev() {
        phase[i] = nearest_branch(raw[i], phase[i + 1]);
    }
    let jump = phase
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    if jump > max_jump {
        return Err(Error::StepTooLarge { jump, step: h });
    }

    let at = |o: i64| phase[offsets.binary_search(&o).expect("offset present")];
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels + 1);
    for j in 0..=levels {
        let s = 1i64 << (levels - j);
        let hj = s as f64 * unit;
        let d = (-at(2 * s) + 8.0 * at(s) - 8.0 * at(-s) + at(-2 * s)) / (12.0 * hj);
        let mut row = vec![d];
        for m in 1..=j {
            let factor = f64::from(1u32 << (2 * m + 2));
            let prev: &Vec<f64> = &table[j - 1];
            let v = (factor * row[m - 1] - prev[m - 1]) / (factor - 1.0);
            row.push(v);
        }
        table.push(row);
    }
    let last = &table[levels];
    let best = last[levels];
    let err = if levels > 0 {
        (best - last[levels - 1]).abs()
    } else {
        0.0
    };
    Ok((best, err, energies))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::hartman_phase_time;

    fn nat() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    #[test]
    fn free_flight() {
        let p = PotentialProfile::free(5.0).unwrap();
        let r = phase_time(&p, nat(), 0.5).unwrap();
        assert!((r.tau - 5.0).abs() < 1e-10, "{}", r.tau);
        assert_eq!(r.reference_length, 5.0);
        assert!(!r.resonance_flag);
    }

    #[test]
    fn canonical_two_barrier_point() {
        let p = PotentialProfile::double_barrier(20.0, 3.0, 1.0).unwrap();
        let r = phase_time(&p, nat(), 0.5).unwrap();
        assert!((r.tau / 2.0 - 1.0).abs() < 1e-6, "{}", r.tau);
        assert!(!r.resonance_flag);
    }

    #[test]
    fn single_opaque_barrier() {
        let p = PotentialProfile::single_barrier(20.0, 1.0).unwrap();
        let r = phase_time(&p, nat(), 0.5).unwrap();
        let limit = hartman_phase_time(1.0, 1.0, nat());
        assert!((r.tau / limit - 1.0).abs() < 1e-8, "{}", r.tau);
    }

    #[test]
    fn step_halving_is_stable() {
        let p = PotentialProfile::double_barrier(20.0, 3.0, 1.0).unwrap();
        let a = phase_time(&p, nat(), 0.5).unwrap();
        let cfg = PhaseTimeConfig {
            rel_step: 0.5e-4,
            ..Default::default()
        };
        let b = phase_time_with(&p, nat(), 0.5, &cfg).unwrap();
        assert!((a.tau / b.tau - 1.0).abs() < 1e-8);
    }

    #[test]
    fn flags_resonant_gap() {
        let p = PotentialProfile::double_barrier(8.0, std::f64::consts::FRAC_PI_2, 1.0).unwrap();
        let r = phase_time(&p, nat(), 0.5).unwrap();
        assert!(r.resonance_flag);
        assert!(r.tau > 100.0);
    }

    #[test]
    fn stencil_near_height_shrinks_or_fails() {
        let p = PotentialProfile::single_barrier(1.0, 1.0).unwrap();
        let r = phase_time(&p, nat(), 1.0 - 1e-6).unwrap();
        assert!(r.step_used <= 0.25e-6 * (1.0 + 1e-6));
        assert!(phase_time(&p, nat(), 1.0).is_err());
    }
}
