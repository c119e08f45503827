mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use tunneltime_core::harness::reproduce::{reproduce, DEFAULT_SEED};
use tunneltime_core::harness::sweep::{run_sweep, PacketScaling, SweepOutput, SweepSpec};
use tunneltime_core::harness::{waveguide_map, Cell, Format, Table, WaveguideParams};
use tunneltime_core::phase_time::{phase_time_with, PhaseTimeConfig};
use tunneltime_core::resonance::resonance_scan;
use tunneltime_core::wavepacket::{simulate_arrival_observed, FrameWriter};
use tunneltime_core::{
    phase_time, solve_scattering, transmission, PhysicalConstants, PotentialProfile,
};

use args::{Cli, Command, Global, Units, WavepacketArgs};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let g = &cli.global;
    if let Some(jobs) = g.jobs {
        rayon_pool(jobs)?;
    }
    let table = match &cli.command {
        Command::Scatter { profile, energy } => scatter(g, profile, *energy)?,
        Command::PhaseTime {
            profile,
            energy,
            range,
            points,
        } => phase_times(g, profile, *energy, range.as_deref(), *points)?,
        Command::Sweep { spec } => sweep(g, spec)?,
        Command::Resonances {
            profile,
            range,
            points,
        } => resonances(g, profile, range, *points)?,
        Command::Wavepacket(args) => wavepacket(g, args)?,
        Command::Waveguide { params, outputs } => {
            let outputs: Vec<SweepOutput> = outputs.iter().map(|&o| o.into()).collect();
            waveguide(g, params, &outputs)?
        }
        Command::Reproduce => {
            let report = reproduce(g.seed.unwrap_or(DEFAULT_SEED));
            println!("{report}");
            if g.out.is_some() {
                emit(g, &checks_table(&report))?;
            }
            return Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
    };
    emit(g, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn rayon_pool(jobs: usize) -> Result<()> {
    if jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .context("configuring the worker pool")
}

fn emit(g: &Global, table: &Table) -> Result<()> {
    let format = Format::from(g.format);
    match &g.out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            table.write(BufWriter::new(file), format)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(&mut lock, format)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn base_constants(g: &Global) -> PhysicalConstants {
    match g.units {
        Units::Natural => PhysicalConstants::natural(),
        Units::Si => PhysicalConstants::electron(),
    }
}

/// Constants in the profile file win over `--units`; `--mass-ratio` applies last.
fn constants_for(g: &Global, from_file: Option<PhysicalConstants>) -> Result<PhysicalConstants> {
    let c = from_file.unwrap_or_else(|| base_constants(g));
    Ok(match g.mass_ratio {
        Some(r) => c.with_mass_ratio(r)?,
        None => c,
    })
}

fn load_profile(g: &Global, path: &Path) -> Result<(PotentialProfile, PhysicalConstants)> {
    let (profile, file_constants) = PotentialProfile::load(path)
        .with_context(|| format!("reading profile {}", path.display()))?;
    Ok((profile, constants_for(g, file_constants)?))
}

fn pt_config(g: &Global) -> PhaseTimeConfig {
    let mut cfg = PhaseTimeConfig::default();
    if let Some(t) = g.tolerance {
        cfg.resonance_threshold = t;
    }
    cfg
}

fn scatter(g: &Global, path: &Path, energy: f64) -> Result<Table> {
    let (profile, c) = load_profile(g, path)?;
    let s = solve_scattering(&profile, c, energy)?;
    let mut t = Table::new([
        "energy",
        "k",
        "transmission",
        "reflection",
        "unitarity_defect",
        "t_re",
        "t_im",
        "r_re",
        "r_im",
        "log_abs_t",
        "phase",
    ]);
    t.push(vec![
        energy.into(),
        s.k.into(),
        s.transmission_probability().into(),
        s.reflection_probability().into(),
        s.unitarity_defect().into(),
        s.transmission_amp.re.into(),
        s.transmission_amp.im.into(),
        s.reflection_amp.re.into(),
        s.reflection_amp.im.into(),
        s.transmission_log_modulus.into(),
        s.transmission_phase.into(),
    ]);
    Ok(t)
}

fn phase_times(
    g: &Global,
    path: &Path,
    energy: Option<f64>,
    range: Option<&[f64]>,
    points: usize,
) -> Result<Table> {
    let (profile, c) = load_profile(g, path)?;
    let energies: Vec<f64> = match (energy, range) {
        (Some(e), None) => vec![e],
        (None, Some([lo, hi])) => {
            if points < 2 {
                bail!("--points must be at least 2");
            }
            (0..points)
                .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .collect()
        }
        _ => bail!("give either --energy or --range LO HI"),
    };
    let cfg = pt_config(g);
    let mut t = Table::new([
        "energy",
        "tau",
        "tau_error",
        "step",
        "reference_length",
        "near_resonance",
        "status",
    ]);
    for e in energies {
        match phase_time_with(&profile, c, e, &cfg) {
            Ok(r) => t.push(vec![
                e.into(),
                r.tau.into(),
                r.error_estimate.into(),
                r.step_used.into(),
                r.reference_length.into(),
                r.resonance_flag.into(),
                if r.resonance_flag {
                    "near_resonance"
                } else {
                    "ok"
                }
                .into(),
            ]),
            Err(err) => t.push(vec![
                e.into(),
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                profile.extent().into(),
                false.into(),
                err.to_string().into(),
            ]),
        }
    }
    Ok(t)
}

fn sweep(g: &Global, path: &Path) -> Result<Table> {
    let mut spec = SweepSpec::load(path).with_context(|| format!("reading {}", path.display()))?;
    spec.constants = Some(constants_for(g, spec.constants)?);
    if let Some(tol) = g.tolerance {
        spec.phase_time.resonance_threshold = tol;
    }
    let table = run_sweep(&spec)?;
    let flagged = table.records.iter().filter(|r| !r.is_ok()).count();
    if flagged > 0 {
        log::warn!("{flagged} of {} rows flagged", table.records.len());
    }
    Ok(table.to_table())
}

fn resonances(g: &Global, path: &Path, range: &[f64], points: usize) -> Result<Table> {
    let (profile, c) = load_profile(g, path)?;
    let fits = resonance_scan(&profile, c, (range[0], range[1]), points)?;
    let mut t = Table::new([
        "e_r",
        "gamma",
        "tau_nr",
        "fit_quality",
        "peak_energy",
        "peak_transmission",
        "flagged",
    ]);
    for f in fits {
        t.push(vec![
            f.e_r.into(),
            f.gamma.into(),
            f.tau_nr.into(),
            f.fit_quality.into(),
            f.peak_energy.into(),
            f.peak_transmission.into(),
            f.flagged.into(),
        ]);
    }
    Ok(t)
}

fn wavepacket(g: &Global, args: &WavepacketArgs) -> Result<Table> {
    let (profile, c) = load_profile(g, &args.profile)?;
    let k0 = c.wavenumber(args.energy);
    let mut scaling = PacketScaling {
        sigma_k0: args.sigma_k0,
        absorber: args.absorber,
        ..Default::default()
    };
    if let Some(v) = args.dx_k0 {
        scaling.dx_k0 = v;
    }
    if let Some(v) = args.dt_k0_squared {
        scaling.dt_k0_squared = v;
    }
    if let Some(v) = args.detector_offset_k0 {
        scaling.detector_offset_k0 = v;
    }
    let spec = scaling.at(k0, c);

    let mut frames = match &args.frames {
        Some(p) => Some(FrameWriter::create(p, args.frame_every, args.frame_stride)?),
        None => None,
    };
    let mut frame_error = None;
    let run = simulate_arrival_observed(&profile, c, &spec, |s| {
        if let Some(w) = frames.as_mut() {
            if let Err(e) = w.observe(s) {
                frame_error.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = frame_error {
        return Err(e.into());
    }
    if let Some(w) = frames {
        w.finish()?;
    }

    let stationary = transmission(&profile, c, args.energy)?.probability();
    let tau = phase_time(&profile, c, args.energy).ok().map(|r| r.tau);
    let b = run.budget;
    let mut t = Table::new([
        "energy",
        "k0",
        "sigma",
        "detector_x",
        "t_peak",
        "t_centroid",
        "transmitted_fraction",
        "stationary_transmission",
        "phase_time",
        "reflected",
        "inside",
        "transmitted",
        "absorbed",
        "steps",
    ]);
    t.push(vec![
        args.energy.into(),
        k0.into(),
        spec.sigma.into(),
        run.record.detector_x.into(),
        run.record.t_peak.into(),
        run.record.t_centroid.into(),
        run.record.transmitted_fraction.into(),
        stationary.into(),
        tau.into(),
        b.reflected.into(),
        b.inside.into(),
        b.transmitted.into(),
        b.absorbed.into(),
        run.steps.into(),
    ]);
    Ok(t)
}

fn waveguide(g: &Global, path: &Path, outputs: &[SweepOutput]) -> Result<Table> {
    if outputs.contains(&SweepOutput::WavepacketArrival) {
        bail!("the waveguide correspondence holds for stationary analyses only; wavepacket_arrival is not available here");
    }
    if g.units != Units::Natural || g.mass_ratio.is_some() {
        bail!("waveguide mapping fixes its own units; drop --units/--mass-ratio");
    }
    let params =
        WaveguideParams::load(path).with_context(|| format!("reading {}", path.display()))?;
    let m = waveguide_map(&params)?;
    let cfg = pt_config(g);
    let mut t = Table::new([
        "output",
        "energy",
        "height",
        "k",
        "chi",
        "omega",
        "cutoff_normal",
        "cutoff_undersized",
        "tau",
        "group_delay",
        "transmission",
        "phase",
        "e_r",
        "gamma",
        "status",
    ]);
    let height = m.profile.max_height();
    let base = |name: &str| -> Vec<Cell> {
        vec![
            name.into(),
            m.energy.into(),
            height.into(),
            m.k.into(),
            m.chi.into(),
            m.omega.into(),
            m.cutoff_normal.into(),
            m.cutoff_undersized.into(),
        ]
    };
    for &o in outputs {
        let mut row = base(o.name());
        let (mut tau, mut gd, mut tr, mut ph, mut er, mut gm) =
            (None, None, None, None, None, None);
        let status = match o {
            SweepOutput::PhaseTime => {
                match phase_time_with(&m.profile, m.constants, m.energy, &cfg) {
                    Ok(r) => {
                        tau = Some(r.tau);
                        gd = Some(m.group_delay(r.tau));
                        if r.resonance_flag {
                            "near_resonance".to_owned()
                        } else {
                            "ok".to_owned()
                        }
                    }
                    Err(e) => e.to_string(),
                }
            }
            SweepOutput::Transmission => match transmission(&m.profile, m.constants, m.energy) {
                Ok(x) => {
                    tr = Some(x.probability());
                    ph = Some(x.phase);
                    "ok".to_owned()
                }
                Err(e) => e.to_string(),
            },
            SweepOutput::Resonances => {
                match resonance_scan(
                    &m.profile,
                    m.constants,
                    (1e-3 * height, (1.0 - 1e-3) * height),
                    2000,
                ) {
                    Ok(fits) if !fits.is_empty() => {
                        er = Some(fits[0].e_r);
                        gm = Some(fits[0].gamma);
                        if !fits[0].is_resolved() {
                            "unresolved".to_owned()
                        } else if fits[0].flagged {
                            "poor_fit".to_owned()
                        } else {
                            "ok".to_owned()
                        }
                    }
                    Ok(_) => "no_resonance".to_owned(),
                    Err(e) => e.to_string(),
                }
            }
            SweepOutput::WavepacketArrival => unreachable!("rejected above"),
        };
        row.extend([tau, gd, tr, ph, er, gm].map(Cell::from));
        row.push(status.into());
        t.push(row);
    }
    Ok(t)
}

fn checks_table(report: &tunneltime_core::harness::ReproduceReport) -> Table {
    let mut t = Table::new([
        "id",
        "name",
        "measured",
        "target",
        "error",
        "tolerance",
        "runtime_s",
        "budget_s",
        "passed",
        "detail",
    ]);
    for c in &report.checks {
        t.push(vec![
            (c.id as usize).into(),
            c.name.into(),
            c.measured.into(),
            c.target.into(),
            c.error.into(),
            c.tolerance.into(),
            c.runtime.as_secs_f64().into(),
            c.budget.as_secs_f64().into(),
            c.passed().into(),
            c.detail.as_str().into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from([
            "tunneltime",
            "phase-time",
            "--profile",
            "p.toml",
            "--range",
            "0.1",
            "0.9",
            "--format",
            "jsonl",
            "--units",
            "si",
        ])
        .unwrap();
        assert_eq!(cli.global.format, args::FormatArg::Jsonl);
        assert_eq!(cli.global.units, Units::Si);
        assert!(matches!(
            cli.command,
            Command::PhaseTime { range: Some(_), .. }
        ));
    }

    #[test]
    fn waveguide_rejects_wavepacket_output() {
        let cli = Cli::try_parse_from([
            "tunneltime",
            "waveguide",
            "guide.toml",
            "--outputs",
            "phase-time,wavepacket-arrival",
        ])
        .unwrap();
        let err = run(&cli).unwrap_err();
        assert!(err.to_string().contains("stationary"));
    }

    #[test]
    fn file_constants_take_precedence() {
        let cli = Cli::try_parse_from([
            "tunneltime",
            "--units",
            "si",
            "--mass-ratio",
            "0.5",
            "reproduce",
        ])
        .unwrap();
        let c = constants_for(&cli.global, Some(PhysicalConstants::natural())).unwrap();
        assert_eq!(c, PhysicalConstants::new(1.0, 0.5).unwrap());
        let c = constants_for(&cli.global, None).unwrap();
        assert_eq!(c.hbar, PhysicalConstants::electron().hbar);
    }
}
