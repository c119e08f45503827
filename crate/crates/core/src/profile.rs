//! Piecewise-constant potentials.
//!
//! A profile is an ordered list of segments starting at `x = 0`, flanked on
//! both sides by semi-infinite zero-potential leads.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub width: f64,
    pub height: f64,
}

impl Segment {
    pub const fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct PotentialProfile {
    segments: Vec<Segment>,
}

impl TryFrom<Vec<Segment>> for PotentialProfile {
    type Error = Error;

    fn try_from(segments: Vec<Segment>) -> Result<Self> {
        Self::new(segments)
    }
}

impl From<PotentialProfile> for Vec<Segment> {
    fn from(p: PotentialProfile) -> Self {
        p.segments
    }
}

impl PotentialProfile {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            if !(s.width.is_finite() && s.width > 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "segment {i}: width must be positive and finite, got {}",
                    s.width
                )));
            }
            if !(s.height.is_finite() && s.height >= 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "segment {i}: height must be non-negative and finite, got {}",
                    s.height
                )));
            }
        }
        Ok(Self { segments })
    }

    /// No segments at all: free propagation.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Zero potential over `[0, extent]`.
    pub fn free(extent: f64) -> Result<Self> {
        Self::new(vec![Segment::new(extent, 0.0)])
    }

    pub fn single_barrier(width: f64, height: f64) -> Result<Self> {
        Self::new(vec![Segment::new(width, height)])
    }

    /// Two equal barriers of width `a` and height `v0` separated by `gap = L − a`.
    pub fn double_barrier(a: f64, gap: f64, v0: f64) -> Result<Self> {
        Self::new(vec![
            Segment::new(a, v0),
            Segment::new(gap, 0.0),
            Segment::new(a, v0),
        ])
    }

    /// Barriers of equal height with the given widths, separated by the given
    /// zero-potential gaps (`gaps.len() == widths.len() - 1`).
    pub fn barrier_train(widths: &[f64], gaps: &[f64], height: f64) -> Result<Self> {
        if widths.is_empty() || gaps.len() + 1 != widths.len() {
            return Err(Error::InvalidProfile(format!(
                "barrier train needs n widths and n-1 gaps, got {} and {}",
                widths.len(),
                gaps.len()
            )));
        }
        let mut segments = Vec::with_capacity(2 * widths.len());
        for (i, &w) in widths.iter().enumerate() {
            if i > 0 {
                segments.push(Segment::new(gaps[i - 1], 0.0));
            }
            segments.push(Segment::new(w, height));
        }
        Self::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Total width of the potential region, the `D` of the phase-time reference factor.
    pub fn extent(&self) -> f64 {
        self.segments.iter().map(|s| s.width).sum()
    }

    /// Left edge of every segment followed by the right edge of the last one.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut x = 0.0;
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push(x);
        for s in &self.segments {
            x += s.width;
            out.push(x);
        }
        out
    }

    /// Potential at `x`; zero in the leads. Boundary points belong to the right segment.
    pub fn potential_at(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let mut left = 0.0;
        for s in &self.segments {
            if x < left + s.width {
                return s.height;
            }
            left += s.width;
        }
        0.0
    }

    /// Mean potential over `[x0, x1]`.
    pub fn average_potential(&self, x0: f64, x1: f64) -> f64 {
        if x1 <= x0 {
            return self.potential_at(x0);
        }
        let mut acc = 0.0;
        let mut left = 0.0;
        for s in &self.segments {
            let right = left + s.width;
            let lo = x0.max(left);
            let hi = x1.min(right);
            if hi > lo {
                acc += s.height * (hi - lo);
            }
            left = right;
        }
        acc / (x1 - x0)
    }

    pub fn max_height(&self) -> f64 {
        self.segments.iter().map(|s| s.height).fold(0.0, f64::max)
    }

    /// Smallest nonzero height, `None` for a free profile.
    pub fn min_barrier_height(&self) -> Option<f64> {
        self.segments
            .iter()
            .map(|s| s.height)
            .filter(|&h| h > 0.0)
            .reduce(f64::min)
    }

    /// Mirror image about the profile centre.
    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().copied().collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.segments.iter().eq(self.segments.iter().rev())
    }

    pub fn from_toml_str(s: &str) -> Result<(Self, Option<PhysicalConstants>)> {
        let file: ProfileFile = toml::from_str(s)?;
        if let Some(c) = &file.constants {
            c.validate()?;
        }
        Ok((file.segments, file.constants))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, Option<PhysicalConstants>)> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self, constants: Option<PhysicalConstants>) -> String {
        let file = ProfileFile {
            constants,
            segments: self.clone(),
        };
        toml::to_string(&file).expect("profile serialization cannot fail")
    }
}

/// On-disk profile document.
///
/// ```toml
/// [constants]        # optional, natural units when absent
/// hbar = 1.0
/// mass = 1.0
///
/// [[segments]]
/// width = 20.0
/// height = 1.0
///
/// [[segments]]
/// width = 3.0
/// height = 0.0
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<PhysicalConstants>,
    pub segments: PotentialProfile,
}

/// Two equal rectangular barriers: `[0, a]` and `[L, L + a]` with `L = a + gap`.
///
/// Unlike [`PotentialProfile`] this accepts `a = 0` or `gap = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleBarrier {
    pub width: f64,
    pub gap: f64,
    pub height: f64,
}

impl DoubleBarrier {
    pub fn new(width: f64, gap: f64, height: f64) -> Result<Self> {
        if !(width.is_finite() && width >= 0.0 && gap.is_finite() && gap >= 0.0) {
            return Err(Error::InvalidProfile(format!(
                "double barrier needs a >= 0 and gap >= 0, got a = {width}, gap = {gap}"
            )));
        }
        if !(height.is_finite() && height >= 0.0) {
            return Err(Error::InvalidProfile(format!("height = {height}")));
        }
        Ok(Self { width, gap, height })
    }

    /// Start of the second barrier.
    pub fn l(&self) -> f64 {
        self.width + self.gap
    }

    pub fn extent(&self) -> f64 {
        2.0 * self.width + self.gap
    }

    /// Recognize the barrier/gap/barrier geometry.
    pub fn from_profile(profile: &PotentialProfile) -> Result<Self> {
        match profile.segments() {
            [b1, g, b2] if b1.width == b2.width && b1.height == b2.height && g.height == 0.0 => {
                Self::new(b1.width, g.width, b1.height)
            }
            _ => Err(Error::InvalidProfile(
                "expected two equal barriers separated by a zero-potential gap".into(),
            )),
        }
    }

    pub fn to_profile(&self) -> Result<PotentialProfile> {
        PotentialProfile::double_barrier(self.width, self.gap, self.height)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_segments() {
        assert!(PotentialProfile::new(vec![Segment::new(0.0, 1.0)]).is_err());
        assert!(PotentialProfile::new(vec![Segment::new(1.0, -1.0)]).is_err());
        assert!(PotentialProfile::new(vec![Segment::new(f64::INFINITY, 1.0)]).is_err());
        assert!(PotentialProfile::barrier_train(&[1.0, 2.0], &[], 1.0).is_err());
    }

    #[test]
    fn double_barrier_geometry() {
        let p = PotentialProfile::double_barrier(20.0, 3.0, 1.0).unwrap();
        assert_eq!(p.extent(), 43.0);
        assert_eq!(p.boundaries(), vec![0.0, 20.0, 23.0, 43.0]);
        assert!(p.is_symmetric());
        let db = DoubleBarrier::from_profile(&p).unwrap();
        assert_eq!(db.l(), 23.0);
        assert_eq!(db.to_profile().unwrap(), p);
        assert_eq!(p.potential_at(-1.0), 0.0);
        assert_eq!(p.potential_at(0.0), 1.0);
        assert_eq!(p.potential_at(21.0), 0.0);
        assert_eq!(p.potential_at(43.0), 0.0);
        assert!((p.average_potential(19.5, 20.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn toml_roundtrip() {
        let src = r#"
            [constants]
            hbar = 1.0
            mass = 0.5

            [[segments]]
            width = 2.0
            height = 1.5

            [[segments]]
            width = 1.0
            height = 0.0
        "#;
        let (p, c) = PotentialProfile::from_toml_str(src).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(c.unwrap().mass, 0.5);
        let (q, c2) = PotentialProfile::from_toml_str(&p.to_toml_string(c)).unwrap();
        assert_eq!(p, q);
        assert_eq!(c, c2);

        let bad = "[[segments]]\nwidth = -2.0\nheight = 1.0\n";
        assert!(PotentialProfile::from_toml_str(bad).is_err());
    }
}
