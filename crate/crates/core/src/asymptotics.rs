//! Closed-form amplitudes of the two-barrier problem in the opaque limit
//! `χa → ∞`, the real amplitude factor `A`, the cavity resonance condition
//! and the limiting phase time `2m/(ħkχ)`.
//!
//! Formulas are evaluated exactly as written, so the second-barrier and
//! first-barrier sets drop `e^{−2χa}` corrections at slightly different places;
//! agreement with the exact solver is `O(e^{−2χa})`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::matching::MatchingCoefficients;
use crate::numerics::find_roots;

/// Relative guard on the denominator of `A`: `|den| < guard · 2χk` is rejected.
pub const RESONANCE_GUARD: f64 = 1e-6;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpaqueLimitAmplitudes {
    pub alpha1: Complex64,
    pub beta1: Complex64,
    pub refl1: Complex64,
    pub trans1: Complex64,
    pub alpha2: Complex64,
    pub beta2: Complex64,
    pub refl2: Complex64,
    pub trans2: Complex64,
    /// Real amplitude factor of the inter-barrier cavity.
    pub a_factor: f64,
}

impl OpaqueLimitAmplitudes {
    pub fn as_coefficients(&self) -> MatchingCoefficients {
        MatchingCoefficients {
            refl1: self.refl1,
            trans1: self.trans1,
            alpha1: self.alpha1,
            beta1: self.beta1,
            refl2: self.refl2,
            trans2: self.trans2,
            alpha2: self.alpha2,
            beta2: self.beta2,
        }
    }

    pub fn total_transmission(&self) -> Complex64 {
        self.trans1 * self.trans2
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Opaque-limit amplitudes for barriers of width `a` at `[0, a]` and `[l, l + a]`.
pub fn opaque_amplitudes(k: f64, chi: f64, a: f64, l: f64) -> Result<OpaqueLimitAmplitudes> {
    check_positive("k", k)?;
    check_positive("chi", chi)?;
    check_positive("a", a)?;
    if !(l.is_finite() && l >= a) {
        return Err(Error::InvalidArgument(format!(
            "need L >= a, got L = {l}, a = {a}"
        )));
    }
    let gap = l - a;
    let den = resonance_condition(k, chi, gap);
    let guard = RESONANCE_GUARD * 2.0 * chi * k;
    if den.abs() < guard {
        return Err(Error::NearResonance {
            denominator: den.abs(),
            guard,
        });
    }
    let a_factor = 2.0 * chi * k / den;

    let ik = I * k;
    let m = ik - chi;
    let p = ik + chi;
    let e = |z: Complex64| z.exp();
    let decay = Complex64::new(-chi * a, 0.0);

    Ok(OpaqueLimitAmplitudes {
        alpha2: e(ik * l) * 2.0 * ik / m,
        beta2: e(ik * l + 2.0 * decay) * (-2.0 * ik * p) / (m * m),
        refl2: e(2.0 * ik * l) * p / m,
        trans2: e(decay) * e(-ik * a) * (-4.0 * ik * chi) / (m * m),
        alpha1: 2.0 * ik / m,
        beta1: e(2.0 * decay) * Complex64::new(k, -chi) * ((k * gap).sin() / chi) * a_factor,
        refl1: p / m,
        trans1: e(decay) * e(-ik * l) * a_factor,
        a_factor,
    })
}

/// Cavity resonance function `2χk cos(k·gap) + (χ² − k²) sin(k·gap)`; its zeros
/// are the Fabry–Pérot-like resonances between two equal opaque barriers.
pub fn resonance_condition(k: f64, chi: f64, gap: f64) -> f64 {
    resonance_condition_asymmetric(k, chi, chi, gap)
}

/// Resonance function of a well of wavenumber `k` between opaque barriers of
/// decay constants `chi_left` and `chi_right`:
/// `k(χ₁+χ₂) cos(k·gap) + (χ₁χ₂ − k²) sin(k·gap)`.
pub fn resonance_condition_asymmetric(k: f64, chi_left: f64, chi_right: f64, gap: f64) -> f64 {
    let (s, c) = (k * gap).sin_cos();
    k * (chi_left + chi_right) * c + (chi_left * chi_right - k * k) * s
}

/// Limiting phase time through opaque barriers, `2m/(ħkχ)`. Takes no widths
/// or separations: they do not enter.
pub fn hartman_phase_time(k: f64, chi: f64, constants: PhysicalConstants) -> f64 {
    2.0 * constants.mass / (constants.hbar * k * chi)
}

/// Energies in `(lo, hi)` where the resonance function of the two-barrier
/// geometry vanishes.
pub fn resonance_energies(
    height: f64,
    gap: f64,
    constants: PhysicalConstants,
    lo: f64,
    hi: f64,
) -> Vec<f64> {
    let lo = lo.max(0.0);
    let hi = hi.min(height);
    if hi <= lo {
        return Vec::new();
    }
    let f = |e: f64| {
        let k = constants.wavenumber(e);
        let chi = constants.wavenumber(height - e);
        resonance_condition(k, chi, gap) / (2.0 * k * chi)
    };
    // Normalized function oscillates at most once per π/gap in k.
    let n = (200.0 * (1.0 + gap * constants.wavenumber(hi))) as usize;
    let eps = 1e-9 * (hi - lo);
    find_roots(f, lo + eps, hi - eps, n, 1e-15 * hi)
}

/// Exact counterpart of the amplitude factor: `T₁ e^{χa} e^{ikL}`.
pub fn exact_a_factor(c: &MatchingCoefficients, k: f64, chi: f64, a: f64, l: f64) -> Complex64 {
    c.trans1 * (chi * a).exp() * (I * k * l).exp()
}
