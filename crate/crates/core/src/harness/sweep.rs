//! One-parameter sweeps over a base profile.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::phase_time::{cavity_detuning, phase_time_with, PhaseTimeConfig};
use crate::profile::{PotentialProfile, Segment};
use crate::resonance::resonance_scan;
use crate::scattering::transmission;
use crate::wavepacket::{simulate_arrival, PacketSpec};

use super::records::{Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    /// Width of every barrier segment (`height > 0`).
    BarrierWidth,
    /// Width of every interior free segment (`height == 0`).
    GapWidth,
    Energy,
    /// Number of copies of the first barrier, separated by the first gap.
    BarrierCount,
}

impl SweptParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::BarrierWidth => "barrier_width",
            Self::GapWidth => "gap_width",
            Self::Energy => "energy",
            Self::BarrierCount => "barrier_count",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOutput {
    PhaseTime,
    Transmission,
    Resonances,
    WavepacketArrival,
}

impl SweepOutput {
    pub fn name(self) -> &'static str {
        match self {
            Self::PhaseTime => "phase_time",
            Self::Transmission => "transmission",
            Self::Resonances => "resonances",
            Self::WavepacketArrival => "wavepacket_arrival",
        }
    }
}

/// Packet parameters in units of the carrier wavenumber, so one setting
/// serves every energy of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacketScaling {
    pub sigma_k0: f64,
    pub dx_k0: f64,
    pub dt_k0_squared: f64,
    pub detector_offset_k0: f64,
    pub absorber: Option<f64>,
}

impl Default for PacketScaling {
    fn default() -> Self {
        let p = PacketSpec::with_bandwidth(1.0, 50.0);
        Self {
            sigma_k0: 50.0,
            dx_k0: p.dx,
            dt_k0_squared: p.dt,
            detector_offset_k0: p.detector_offset,
            absorber: None,
        }
    }
}

impl PacketScaling {
    /// Packet spec at carrier `k0`; the time step scales with `m/ħ`.
    pub fn at(&self, k0: f64, constants: PhysicalConstants) -> PacketSpec {
        let mut p = PacketSpec::with_bandwidth(k0, self.sigma_k0);
        p.dx = self.dx_k0 / k0;
        p.dt = self.dt_k0_squared * constants.mass / (constants.hbar * k0 * k0);
        p.detector_offset = self.detector_offset_k0 / k0;
        p.absorber = self.absorber;
        p
    }
}

fn default_scan_points() -> usize {
    2000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base_profile: PotentialProfile,
    /// Natural units when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<PhysicalConstants>,
    pub swept_parameter: SweptParameter,
    pub grid: Vec<f64>,
    pub outputs: Vec<SweepOutput>,
    /// Fixed energy; required unless the energy is swept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    /// Scan range for `resonances`; defaults to just inside `(0, min barrier height)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_range: Option<[f64; 2]>,
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
    #[serde(default)]
    pub phase_time: PhaseTimeConfig,
    #[serde(default)]
    pub packet: PacketScaling,
}

impl SweepSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the canonical JSON encoding, hex.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn constants(&self) -> PhysicalConstants {
        self.constants.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        self.constants().validate()?;
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.grid.is_empty() {
            return bad("sweep grid is empty".into());
        }
        if let Some(x) = self.grid.iter().find(|x| !x.is_finite()) {
            return bad(format!("non-finite grid value {x}"));
        }
        let increasing = self.grid.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return bad("sweep grid must be strictly monotone".into());
        }
        if self.outputs.is_empty() {
            return bad("no outputs requested".into());
        }
        if self.base_profile.is_empty() {
            return bad("base profile has no segments".into());
        }
        match (self.swept_parameter, self.energy) {
            (SweptParameter::Energy, Some(_)) => {
                return bad("energy is swept; drop the fixed energy".into())
            }
            (SweptParameter::Energy, None) => {}
            (_, None) => return bad("a fixed energy is required".into()),
            (_, Some(e)) if !(e > 0.0 && e.is_finite()) => {
                return bad(format!("energy must be positive, got {e}"))
            }
            _ => {}
        }
        let segs = self.base_profile.segments();
        match self.swept_parameter {
            SweptParameter::BarrierWidth if !segs.iter().any(|s| s.height > 0.0) => {
                return bad("base profile has no barrier".into())
            }
            SweptParameter::GapWidth if interior_gaps(segs).next().is_none() => {
                return bad("base profile has no gap between segments".into())
            }
            SweptParameter::BarrierCount => {
                if first_barrier_and_gap(segs).is_none() {
                    return bad("barrier_count needs a barrier followed by a gap".into());
                }
                if let Some(x) = self.grid.iter().find(|x| !(x.fract() == 0.0 && **x >= 1.0)) {
                    return bad(format!("barrier count must be a positive integer, got {x}"));
                }
            }
            _ => {}
        }
        if self.swept_parameter != SweptParameter::BarrierCount
            && self.grid.iter().any(|&x| x <= 0.0)
        {
            return bad(format!(
                "{} values must be positive",
                self.swept_parameter.name()
            ));
        }
        if let Some([lo, hi]) = self.energy_range {
            if !(lo > 0.0 && hi > lo) {
                return bad(format!("energy range [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    /// Profile and energy at one grid value.
    pub fn point(&self, value: f64) -> Result<(PotentialProfile, f64)> {
        let segs = self.base_profile.segments();
        let energy = self.energy.unwrap_or(value);
        let profile = match self.swept_parameter {
            SweptParameter::Energy => self.base_profile.clone(),
            SweptParameter::BarrierWidth => PotentialProfile::new(
                segs.iter()
                    .map(|s| {
                        if s.height > 0.0 {
                            Segment::new(value, s.height)
                        } else {
                            *s
                        }
                    })
                    .collect(),
            )?,
            SweptParameter::GapWidth => {
                let gaps: Vec<usize> = interior_gaps(segs).collect();
                PotentialProfile::new(
                    segs.iter()
                        .enumerate()
                        .map(|(i, s)| {
                            if gaps.contains(&i) {
                                Segment::new(value, 0.0)
                            } else {
                                *s
                            }
                        })
                        .collect(),
                )?
            }
            SweptParameter::BarrierCount => {
                let (barrier, gap) = first_barrier_and_gap(segs)
                    .ok_or_else(|| Error::InvalidArgument("no barrier/gap pair".into()))?;
                let n = value as usize;
                let widths = vec![barrier.width; n];
                let gaps = vec![gap; n.saturating_sub(1)];
                PotentialProfile::barrier_train(&widths, &gaps, barrier.height)?
            }
        };
        Ok((profile, energy))
    }
}

fn interior_gaps(segs: &[Segment]) -> impl Iterator<Item = usize> + '_ {
    let n = segs.len();
    (1..n.saturating_sub(1)).filter(move |&i| segs[i].height == 0.0)
}

fn first_barrier_and_gap(segs: &[Segment]) -> Option<(Segment, f64)> {
    let i = segs.iter().position(|s| s.height > 0.0)?;
    let gap = segs.get(i + 1).filter(|s| s.height == 0.0)?;
    Some((segs[i], gap.width))
}

pub const COLUMNS: [&str; 22] = [
    "spec_hash",
    "index",
    "parameter",
    "value",
    "output",
    "energy",
    "extent",
    "tau",
    "tau_error",
    "transmission",
    "reflection",
    "phase",
    "resonance_count",
    "e_r",
    "gamma",
    "tau_nr",
    "fit_quality",
    "t_peak",
    "t_centroid",
    "transmitted_fraction",
    "near_resonance",
    "status",
];

/// One row of a sweep table. Fields not produced by `output` stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepRecord {
    pub index: usize,
    pub value: f64,
    pub output: Option<SweepOutput>,
    pub energy: f64,
    pub extent: Option<f64>,
    pub tau: Option<f64>,
    pub tau_error: Option<f64>,
    pub transmission: Option<f64>,
    pub reflection: Option<f64>,
    pub phase: Option<f64>,
    pub resonance_count: Option<usize>,
    pub e_r: Option<f64>,
    pub gamma: Option<f64>,
    pub tau_nr: Option<f64>,
    pub fit_quality: Option<f64>,
    pub t_peak: Option<f64>,
    pub t_centroid: Option<f64>,
    pub transmitted_fraction: Option<f64>,
    pub near_resonance: bool,
    /// `ok`, or a short reason the row is flagged.
    pub status: String,
}

impl SweepRecord {
    fn cells(&self, hash: &str, parameter: SweptParameter) -> Vec<Cell> {
        vec![
            hash.into(),
            self.index.into(),
            parameter.name().into(),
            self.value.into(),
            self.output.map_or("", SweepOutput::name).into(),
            self.energy.into(),
            self.extent.into(),
            self.tau.into(),
            self.tau_error.into(),
            self.transmission.into(),
            self.reflection.into(),
            self.phase.into(),
            self.resonance_count.map_or(Cell::Missing, Cell::from),
            self.e_r.into(),
            self.gamma.into(),
            self.tau_nr.into(),
            self.fit_quality.into(),
            self.t_peak.into(),
            self.t_centroid.into(),
            self.transmitted_fraction.into(),
            self.near_resonance.into(),
            self.status.as_str().into(),
        ]
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub spec_hash: String,
    pub parameter: SweptParameter,
    pub records: Vec<SweepRecord>,
}

impl SweepTable {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(COLUMNS);
        for r in &self.records {
            t.push(r.cells(&self.spec_hash, self.parameter));
        }
        t
    }

    pub fn for_output(&self, output: SweepOutput) -> impl Iterator<Item = &SweepRecord> {
        self.records
            .iter()
            .filter(move |r| r.output == Some(output))
    }
}

fn status_of(err: &Error) -> String {
    let kind = match err {
        Error::DegenerateKinematics { .. } => "degenerate",
        Error::NearResonance { .. } => "near_resonance",
        Error::StepTooLarge { .. } => "step_too_large",
        Error::InsufficientTransmission(_) => "insufficient_transmission",
        _ => "failed",
    };
    format!("{kind}: {err}")
}

fn evaluate(spec: &SweepSpec, index: usize, value: f64, output: SweepOutput) -> SweepRecord {
    let mut rec = SweepRecord {
        index,
        value,
        output: Some(output),
        energy: spec.energy.unwrap_or(value),
        status: "ok".into(),
        ..Default::default()
    };
    let (profile, energy) = match spec.point(value) {
        Ok(p) => p,
        Err(e) => {
            rec.status = status_of(&e);
            return rec;
        }
    };
    let c = spec.constants();
    rec.extent = Some(profile.extent());
    // A resonance scan does not use the carrier energy.
    rec.near_resonance = output != SweepOutput::Resonances
        && cavity_detuning(&profile, c, energy)
            .is_some_and(|d| d < spec.phase_time.resonance_threshold);
    let result = match output {
        SweepOutput::PhaseTime => phase_time_with(&profile, c, energy, &spec.phase_time).map(|r| {
            rec.tau = Some(r.tau);
            rec.tau_error = Some(r.error_estimate);
        }),
        SweepOutput::Transmission => transmission(&profile, c, energy).map(|t| {
            rec.transmission = Some(t.probability());
            rec.reflection = Some(t.reflection.norm_sqr());
            rec.phase = Some(t.phase);
        }),
        SweepOutput::Resonances => {
            let range = match (spec.energy_range, profile.min_barrier_height()) {
                (Some([lo, hi]), _) => Ok((lo, hi)),
                (None, Some(v)) => Ok((1e-3 * v, (1.0 - 1e-3) * v)),
                (None, None) => Err(Error::InvalidProfile(
                    "no barrier to resonate between".into(),
                )),
            };
            range
                .and_then(|r| resonance_scan(&profile, c, r, spec.scan_points))
                .map(|fits| {
                    rec.resonance_count = Some(fits.len());
                    if let Some(f) = fits.first() {
                        let finite = |v: f64| v.is_finite().then_some(v);
                        rec.e_r = finite(f.e_r);
                        rec.gamma = finite(f.gamma);
                        rec.tau_nr = finite(f.tau_nr);
                        rec.fit_quality = finite(f.fit_quality);
                        if !f.is_resolved() {
                            rec.status = "unresolved".into();
                        } else if f.flagged {
                            rec.status = "poor_fit".into();
                        }
                    } else {
                        rec.status = "no_resonance".into();
                    }
                })
        }
        SweepOutput::WavepacketArrival => {
            let k0 = c.wavenumber(energy);
            simulate_arrival(&profile, c, &spec.packet.at(k0, c)).map(|run| {
                rec.t_peak = Some(run.record.t_peak);
                rec.t_centroid = Some(run.record.t_centroid);
                rec.transmitted_fraction = Some(run.record.transmitted_fraction);
            })
        }
    };
    if let Err(e) = result {
        rec.status = status_of(&e);
    } else if rec.near_resonance && rec.status == "ok" {
        rec.status = "near_resonance".into();
    }
    rec
}

/// Evaluates every grid point for every requested output, in parallel on the
/// current rayon pool. Rows are ordered by grid index, then by output order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let mut outputs = spec.outputs.clone();
    let mut seen = std::collections::HashSet::new();
    outputs.retain(|o| seen.insert(*o));
    let jobs: Vec<(usize, f64, SweepOutput)> = spec
        .grid
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| outputs.iter().map(move |&o| (i, v, o)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(i, v, o)| evaluate(spec, i, v, o))
        .collect();
    Ok(SweepTable {
        spec_hash: spec.hash(),
        parameter: spec.swept_parameter,
        records,
    })
}

/// `run_sweep` on a dedicated pool of `jobs` threads.
pub fn run_sweep_with_jobs(spec: &SweepSpec, jobs: usize) -> Result<SweepTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| run_sweep(spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"
swept_parameter = "gap_width"
grid = [1.0, 2.0, 3.0]
outputs = ["phase_time", "transmission"]
energy = 0.5

[[base_profile]]
width = 20.0
height = 1.0

[[base_profile]]
width = 3.0
height = 0.0

[[base_profile]]
width = 20.0
height = 1.0
"#;

    #[test]
    fn parses_and_runs() {
        let spec = SweepSpec::from_toml_str(SPEC).unwrap();
        let table = run_sweep(&spec).unwrap();
        assert_eq!(table.records.len(), 6);
        assert_eq!(table.spec_hash.len(), 64);
        for r in table.for_output(SweepOutput::PhaseTime) {
            assert!((r.tau.unwrap() / 2.0 - 1.0).abs() < 1e-6, "{r:?}");
        }
        let t = table.to_table();
        assert_eq!(t.columns.len(), COLUMNS.len());
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = SweepSpec::from_toml_str(SPEC).unwrap();
        spec.grid = vec![1.0, 3.0, 2.0];
        assert!(spec.validate().is_err());
        spec.grid = vec![];
        assert!(spec.validate().is_err());
        spec.grid = vec![1.0];
        spec.energy = None;
        assert!(spec.validate().is_err());
        spec.energy = Some(0.5);
        spec.base_profile = PotentialProfile::single_barrier(1.0, 1.0).unwrap();
        assert!(spec.validate().is_err());
        spec.swept_parameter = SweptParameter::BarrierCount;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn barrier_count_builds_trains() {
        let mut spec = SweepSpec::from_toml_str(SPEC).unwrap();
        spec.swept_parameter = SweptParameter::BarrierCount;
        spec.grid = vec![1.0, 3.0];
        let (p, _) = spec.point(3.0).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p.extent(), 66.0);
        spec.grid = vec![1.5];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn failures_become_rows() {
        let mut spec = SweepSpec::from_toml_str(SPEC).unwrap();
        spec.energy = Some(1.0);
        let table = run_sweep(&spec).unwrap();
        assert_eq!(table.records.len(), 6);
        assert!(table
            .records
            .iter()
            .all(|r| r.status.starts_with("degenerate")));
    }
}
