//! 2×2 transfer matrices in the plane-wave basis.
//!
//! Coefficients `(F, B)` of a segment with local wavenumber `q` describe
//! `ψ = F e^{iq(x−x₀)} + B e^{−iq(x−x₀)}` relative to a reference point `x₀`.
//! Every matrix maps coefficients on the right of an element to those on its
//! left. For evanescent segments (`q = iχ`) `F` multiplies the decaying
//! exponential and `B` the growing one.
//!
//! Entries are stored as `e^{log_scale} · m` so that products over many opaque
//! segments neither overflow nor lose the phase.

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::Kinematics;
use crate::profile::PotentialProfile;

/// Exponent above which propagation factors are kept in log-amplitude form.
pub const LOG_FORM_THRESHOLD: f64 = 50.0;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix {
    m: [[Complex64; 2]; 2],
    log_scale: f64,
}

impl TransferMatrix {
    pub const IDENTITY: Self = Self {
        m: [[ONE, ZERO], [ZERO, ONE]],
        log_scale: 0.0,
    };

    pub fn from_entries(m: [[Complex64; 2]; 2]) -> Self {
        Self { m, log_scale: 0.0 }
    }

    pub fn from_scaled(m: [[Complex64; 2]; 2], log_scale: f64) -> Self {
        Self { m, log_scale }
    }

    /// Normalized entries; the true matrix is `exp(log_scale()) * mantissa()`.
    pub fn mantissa(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// True entries. May overflow to infinity for very opaque profiles.
    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        let s = self.log_scale.exp();
        self.m.map(|row| row.map(|z| z * s))
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j] * self.log_scale.exp()
    }

    /// Determinant as `(log scale, mantissa)`: `det = e^{scale} · mantissa`.
    pub fn log_determinant(&self) -> (f64, Complex64) {
        let m = &self.m;
        (2.0 * self.log_scale, m[0][0] * m[1][1] - m[0][1] * m[1][0])
    }

    pub fn determinant(&self) -> Complex64 {
        let (s, d) = self.log_determinant();
        d * s.exp()
    }

    /// Applies the matrix to a coefficient pair.
    pub fn apply(&self, v: ScaledPair) -> ScaledPair {
        let m = &self.m;
        ScaledPair {
            v: [
                m[0][0] * v.v[0] + m[0][1] * v.v[1],
                m[1][0] * v.v[0] + m[1][1] * v.v[1],
            ],
            log_scale: v.log_scale + self.log_scale,
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        let max = self
            .m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if max > 0.0 && max.is_finite() && (!(1e-8..=1e8).contains(&max) || self.log_scale != 0.0) {
            let inv = 1.0 / max;
            for z in self.m.iter_mut().flatten() {
                *z *= inv;
            }
            self.log_scale += max.ln();
        }
        self
    }

    pub fn approx_eq(&self, other: &Self, rel: f64) -> bool {
        let a = self.entries();
        let b = other.entries();
        let scale = a
            .iter()
            .chain(b.iter())
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(x, y)| (x - y).norm() <= rel * scale)
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        let mut m = [[ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                *out = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        TransferMatrix {
            m,
            log_scale: self.log_scale + rhs.log_scale,
        }
        .normalized()
    }
}

/// A coefficient pair `e^{log_scale} · (v₀, v₁)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledPair {
    pub v: [Complex64; 2],
    pub log_scale: f64,
}

impl ScaledPair {
    pub fn new(forward: Complex64, backward: Complex64) -> Self {
        Self {
            v: [forward, backward],
            log_scale: 0.0,
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        let max = self.v[0].norm().max(self.v[1].norm());
        if max > 0.0 && max.is_finite() {
            self.v[0] /= max;
            self.v[1] /= max;
            self.log_scale += max.ln();
        }
        self
    }

    /// Pair value multiplied by `e^{shift}`, collapsing the scale.
    pub fn to_unscaled(&self, shift: f64) -> [Complex64; 2] {
        let s = (self.log_scale + shift).exp();
        [self.v[0] * s, self.v[1] * s]
    }
}

/// Matching matrix at an interface between wavenumbers `k_left` and `k_right`,
/// both pairs referenced to the interface position.
///
/// Continuity of ψ and ψ′ gives `F_L + B_L = F_R + B_R` and
/// `q_L (F_L − B_L) = q_R (F_R − B_R)`. The determinant equals `k_right / k_left`.
pub fn interface_matrix(k_left: Complex64, k_right: Complex64) -> Result<TransferMatrix> {
    if k_left == ZERO || k_right == ZERO {
        return Err(Error::ZeroWavenumber);
    }
    if k_left == k_right {
        return Ok(TransferMatrix::IDENTITY);
    }
    let rho = k_right / k_left;
    let p = 0.5 * (ONE + rho);
    let m = 0.5 * (ONE - rho);
    Ok(TransferMatrix::from_entries([[p, m], [m, p]]))
}

/// Propagation across a uniform segment of the given width:
/// `diag(e^{−iqw}, e^{+iqw})`, relating left-edge to right-edge references.
pub fn propagation_matrix(wavenumber: Complex64, width: f64) -> Result<TransferMatrix> {
    if !(width.is_finite() && width >= 0.0) {
        return Err(Error::InvalidArgument(format!("segment width {width}")));
    }
    if width == 0.0 {
        return Ok(TransferMatrix::IDENTITY);
    }
    let phase = Complex64::new(0.0, -1.0) * wavenumber * width;
    let growth = phase.re.abs();
    if growth > LOG_FORM_THRESHOLD {
        // Largest diagonal modulus is e^{growth}; keep it in the scale.
        let a = (phase - growth).exp();
        let b = (-phase - growth).exp();
        Ok(TransferMatrix::from_scaled([[a, ZERO], [ZERO, b]], growth))
    } else {
        Ok(TransferMatrix::from_entries([
            [phase.exp(), ZERO],
            [ZERO, (-phase).exp()],
        ]))
    }
}

/// Ordered product of interface and propagation matrices over the whole
/// profile, mapping right-lead coefficients (referenced to the right edge)
/// to left-lead coefficients (referenced to `x = 0`).
pub fn profile_matrix(profile: &PotentialProfile, kin: &Kinematics) -> Result<TransferMatrix> {
    let lead = Complex64::new(kin.k, 0.0);
    let mut prev = lead;
    let mut acc = TransferMatrix::IDENTITY;
    for seg in profile.segments() {
        let q = kin.local_wavenumber(seg.height)?;
        acc = acc * interface_matrix(prev, q)? * propagation_matrix(q, seg.width)?;
        prev = q;
    }
    Ok(acc * interface_matrix(prev, lead)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PhysicalConstants;
    use crate::profile::Segment;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn equal_wavenumbers_give_identity() {
        let t = interface_matrix(c(1.3, 0.0), c(1.3, 0.0)).unwrap();
        assert_eq!(t, TransferMatrix::IDENTITY);
    }

    #[test]
    fn step_into_barrier_matches_direct_matching() {
        // k = χ = 1: solve F_L + B_L = α + β, ik(F_L − B_L) = −χα + χβ directly.
        let t = interface_matrix(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        let e = t.entries();
        let half = 0.5;
        assert!((e[0][0] - c(half, half)).norm() < 1e-15);
        assert!((e[0][1] - c(half, -half)).norm() < 1e-15);
        assert!((e[1][0] - c(half, -half)).norm() < 1e-15);
        assert!((e[1][1] - c(half, half)).norm() < 1e-15);

        for &(alpha, beta) in &[(c(1.0, 0.0), c(0.0, 0.0)), (c(0.3, -0.2), c(-1.1, 0.7))] {
            let l = t.apply(ScaledPair::new(alpha, beta)).to_unscaled(0.0);
            let psi_l = l[0] + l[1];
            let dpsi_l = c(0.0, 1.0) * (l[0] - l[1]);
            let psi_r = alpha + beta;
            let dpsi_r = -alpha + beta;
            assert!((psi_l - psi_r).norm() < 1e-14);
            assert!((dpsi_l - dpsi_r).norm() < 1e-14);
        }
    }

    #[test]
    fn interface_determinant_is_wavenumber_ratio() {
        let (k, chi) = (0.7, 1.9);
        let t = interface_matrix(c(k, 0.0), c(0.0, chi)).unwrap();
        assert!((t.determinant().norm() - chi / k).abs() < 1e-14);
        assert!(interface_matrix(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn propagation_moduli() {
        assert_eq!(
            propagation_matrix(c(2.0, 0.0), 0.0).unwrap(),
            TransferMatrix::IDENTITY
        );
        let free = propagation_matrix(c(1.0, 0.0), 3.0).unwrap().entries();
        assert!((free[0][0].norm() - 1.0).abs() < 1e-15);
        assert!((free[1][1].norm() - 1.0).abs() < 1e-15);

        let ev = propagation_matrix(c(0.0, 1.0), 20.0).unwrap().entries();
        assert!((ev[0][0].norm() / 20f64.exp() - 1.0).abs() < 1e-14);
        assert!((ev[1][1].norm() / (-20f64).exp() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_form_survives_overflow() {
        let t = propagation_matrix(c(0.0, 1.0), 800.0).unwrap();
        assert!((t.log_scale() - 800.0).abs() < 1e-12);
        assert!((t.mantissa()[0][0].norm() - 1.0).abs() < 1e-15);
        assert_eq!(t.mantissa()[1][1].norm(), 0.0);
        let sq = t * t;
        assert!((sq.log_scale() - 1600.0).abs() < 1e-9);
    }

    #[test]
    fn zero_width_segment_insertion_changes_nothing() {
        let kin = Kinematics::new(0.5, PhysicalConstants::natural()).unwrap();
        let k = c(1.0, 0.0);
        let q1 = kin.local_wavenumber(1.0).unwrap();
        let q0 = kin.local_wavenumber(3.0).unwrap();
        let direct = interface_matrix(k, q1).unwrap();
        let via = interface_matrix(k, q0).unwrap()
            * propagation_matrix(q0, 0.0).unwrap()
            * interface_matrix(q0, q1).unwrap();
        assert!(direct.approx_eq(&via, 1e-14));
    }

    #[test]
    fn full_profile_is_unimodular() {
        let kin = Kinematics::new(0.5, PhysicalConstants::natural()).unwrap();
        let p = PotentialProfile::new(vec![
            Segment::new(2.0, 1.0),
            Segment::new(1.5, 0.2),
            Segment::new(0.7, 3.0),
        ])
        .unwrap();
        let m = profile_matrix(&p, &kin).unwrap();
        let (s, d) = m.log_determinant();
        assert!(((d * s.exp()) - c(1.0, 0.0)).norm() < 1e-12);
    }
}
