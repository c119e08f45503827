//! Stationary correspondence between a rectangular waveguide with undersized
//! sections and a one-dimensional barrier profile.
//!
//! For the TE₁₀ mode of a guide of width `b` the cutoff is `ω_c = πc/b` and the
//! longitudinal wavenumber obeys `β² = (ω² − ω_c²)/c²`. With `ħ = 1`, `m = ½`
//! (so `k² = E`) the normal sections map to `V = 0` at `E = (ω² − ω_c,n²)/c²`
//! and the undersized sections to `V = (ω_c,u² − ω_c,n²)/c²`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::profile::{PotentialProfile, Segment};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideParams {
    pub guide_width_normal: f64,
    pub guide_width_undersized: f64,
    /// Cyclic frequency `f = ω/2π`.
    pub frequency: f64,
    /// Section lengths, alternating undersized, normal, undersized, …
    pub segment_lengths: Vec<f64>,
    /// Phase velocity of the filling medium.
    #[serde(default = "unit_speed")]
    pub c: f64,
}

fn unit_speed() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveguideMapping {
    pub profile: PotentialProfile,
    pub constants: PhysicalConstants,
    pub energy: f64,
    pub omega: f64,
    pub c: f64,
    pub cutoff_normal: f64,
    pub cutoff_undersized: f64,
    /// Propagation constant in the normal sections.
    pub k: f64,
    /// Decay constant in the undersized sections.
    pub chi: f64,
}

/// TE₁₀ angular cutoff of a guide of width `b`.
pub fn cutoff(width: f64, c: f64) -> f64 {
    PI * c / width
}

impl WaveguideParams {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency
    }
}

pub fn waveguide_map(params: &WaveguideParams) -> Result<WaveguideMapping> {
    let WaveguideParams {
        guide_width_normal: bn,
        guide_width_undersized: bu,
        c,
        ..
    } = *params;
    for (name, v) in [
        ("guide_width_normal", bn),
        ("guide_width_undersized", bu),
        ("c", c),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Mapping(format!("{name} must be positive, got {v}")));
        }
    }
    if bu >= bn {
        return Err(Error::Mapping(format!(
            "undersized width {bu} must be below the normal width {bn}"
        )));
    }
    if params.segment_lengths.is_empty() {
        return Err(Error::Mapping("no segment lengths".into()));
    }
    let omega = params.omega();
    let wn = cutoff(bn, c);
    let wu = cutoff(bu, c);
    if !(omega > wn && omega < 2.0 * wn) {
        return Err(Error::Mapping(format!(
            "frequency {} outside the single-mode band ({}, {}) of the normal guide",
            params.frequency,
            wn / (2.0 * PI),
            wn / PI
        )));
    }
    if omega >= wu {
        return Err(Error::Mapping(format!(
            "frequency {} not below the undersized cutoff {}: no evanescence",
            params.frequency,
            wu / (2.0 * PI)
        )));
    }
    let c2 = c * c;
    let energy = (omega * omega - wn * wn) / c2;
    let height = (wu * wu - wn * wn) / c2;
    let segments = params
        .segment_lengths
        .iter()
        .enumerate()
        .map(|(i, &w)| Segment::new(w, if i % 2 == 0 { height } else { 0.0 }))
        .collect();
    let profile = PotentialProfile::new(segments).map_err(|e| Error::Mapping(e.to_string()))?;
    let constants = PhysicalConstants::new(1.0, 0.5)?;
    Ok(WaveguideMapping {
        profile,
        constants,
        energy,
        omega,
        c,
        cutoff_normal: wn,
        cutoff_undersized: wu,
        k: constants.wavenumber(energy),
        chi: constants.wavenumber(height - energy),
    })
}

impl WaveguideMapping {
    /// `dE/dω = 2ω/c²`.
    pub fn energy_slope(&self) -> f64 {
        2.0 * self.omega / (self.c * self.c)
    }

    /// Group delay `dφ/dω` of the guide from the phase time of the mapped profile.
    pub fn group_delay(&self, tau: f64) -> f64 {
        tau / self.constants.hbar * self.energy_slope()
    }
}
