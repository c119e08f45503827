use std::f64::consts::FRAC_PI_2;

use tunneltime_core::harness::sweep::{
    run_sweep, run_sweep_with_jobs, SweepOutput, SweepSpec, SweptParameter,
};
use tunneltime_core::harness::{waveguide_map, Format, WaveguideParams};
use tunneltime_core::{phase_time, PotentialProfile};

fn spec(parameter: SweptParameter, grid: Vec<f64>, outputs: Vec<SweepOutput>) -> SweepSpec {
    SweepSpec {
        base_profile: PotentialProfile::double_barrier(20.0, 3.0, 1.0).unwrap(),
        constants: None,
        swept_parameter: parameter,
        grid,
        outputs,
        energy: Some(0.5),
        energy_range: None,
        scan_points: 2000,
        phase_time: Default::default(),
        packet: Default::default(),
    }
}

fn taus(s: &SweepSpec) -> Vec<f64> {
    run_sweep(s)
        .unwrap()
        .for_output(SweepOutput::PhaseTime)
        .map(|r| r.tau.unwrap())
        .collect()
}

fn max_rel_spread(v: &[f64]) -> f64 {
    v.iter().map(|t| (t / v[0] - 1.0).abs()).fold(0.0, f64::max)
}

#[test]
fn barrier_width_sweep_is_flat() {
    let s = spec(
        SweptParameter::BarrierWidth,
        vec![10.0, 15.0, 20.0, 25.0],
        vec![SweepOutput::PhaseTime],
    );
    assert!(max_rel_spread(&taus(&s)) < 1e-6);
}

#[test]
fn barrier_count_sweep_is_flat() {
    let s = spec(
        SweptParameter::BarrierCount,
        vec![1.0, 2.0, 3.0, 4.0],
        vec![SweepOutput::PhaseTime],
    );
    let t = taus(&s);
    assert_eq!(t.len(), 4);
    assert!(max_rel_spread(&t) < 1e-4, "{t:?}");
}

#[test]
fn gap_sweep_flags_exactly_the_guarded_points() {
    // Grid straddles the zero at k·gap = π/2 (k = χ = 1).
    let grid: Vec<f64> = (0..41).map(|i| 1.0 + 0.03 * i as f64).collect();
    let s = spec(
        SweptParameter::GapWidth,
        grid.clone(),
        vec![SweepOutput::Transmission],
    );
    let table = run_sweep(&s).unwrap();
    let threshold = s.phase_time.resonance_threshold;
    let mut flagged = 0;
    for (r, &g) in table.records.iter().zip(&grid) {
        // Independent prediction: |2kχ cos(kg) + (χ² − k²) sin(kg)| < threshold·2kχ at k = χ = 1.
        let predicted = (2.0 * g.cos()).abs() < threshold * 2.0;
        assert_eq!(r.near_resonance, predicted, "gap {g}");
        assert_eq!(r.status == "near_resonance", predicted);
        flagged += usize::from(predicted);
    }
    assert!(flagged > 0 && flagged < grid.len());
    assert!(grid.iter().any(|&g| g < FRAC_PI_2) && grid.iter().any(|&g| g > FRAC_PI_2));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let mut s = spec(
        SweptParameter::Energy,
        (1..=40).map(|i| 0.02 * i as f64 + 0.07).collect(),
        vec![SweepOutput::PhaseTime, SweepOutput::Transmission],
    );
    s.energy = None;
    let one = run_sweep_with_jobs(&s, 1).unwrap();
    let four = run_sweep_with_jobs(&s, 4).unwrap();
    for f in [Format::Csv, Format::Jsonl] {
        assert_eq!(one.to_table().render(f), four.to_table().render(f));
    }
    assert_eq!(one.records.len(), 80);
    assert!(one.records.windows(2).all(|w| w[0].index <= w[1].index));
}

#[test]
fn records_round_trip_through_files() {
    let s = spec(
        SweptParameter::GapWidth,
        vec![1.0, 2.0, 3.0],
        vec![SweepOutput::PhaseTime],
    );
    let table = run_sweep(&s).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    table
        .to_table()
        .write(std::fs::File::create(&csv_path).unwrap(), Format::Csv)
        .unwrap();
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    let tau_col = headers.iter().position(|h| h == "tau").unwrap();
    let hash_col = headers.iter().position(|h| h == "spec_hash").unwrap();
    for (row, rec) in reader.records().zip(&table.records) {
        let row = row.unwrap();
        assert_eq!(row[tau_col].parse::<f64>().unwrap(), rec.tau.unwrap());
        assert_eq!(&row[hash_col], table.spec_hash);
    }

    let text = table.to_table().render(Format::Jsonl);
    for (line, rec) in text.lines().zip(&table.records) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["tau"].as_f64().unwrap(), rec.tau.unwrap());
        assert!(v["t_peak"].is_null());
        assert_eq!(v["parameter"], "gap_width");
    }
}

#[test]
fn spec_hash_tracks_content() {
    let a = spec(
        SweptParameter::GapWidth,
        vec![1.0, 2.0],
        vec![SweepOutput::PhaseTime],
    );
    let mut b = a.clone();
    assert_eq!(a.hash(), b.hash());
    b.grid[1] = 2.5;
    assert_ne!(a.hash(), b.hash());
}

#[test]
fn resonance_output_reports_fits() {
    let mut s = spec(
        SweptParameter::BarrierWidth,
        vec![3.0, 4.0],
        vec![SweepOutput::Resonances],
    );
    s.base_profile = PotentialProfile::double_barrier(4.0, FRAC_PI_2, 1.0).unwrap();
    s.energy_range = Some([0.3, 0.7]);
    s.scan_points = 400;
    let table = run_sweep(&s).unwrap();
    for r in &table.records {
        assert_eq!(r.status, "ok", "{r:?}");
        assert!(r.resonance_count.unwrap() >= 1);
        assert!((r.e_r.unwrap() - 0.5).abs() < 0.01);
    }
    // A wider barrier gives a narrower line.
    assert!(table.records[1].gamma.unwrap() < table.records[0].gamma.unwrap());
}

#[test]
fn waveguide_delay_ignores_normal_section_length() {
    let taus: Vec<f64> = [1.5, 2.5, 3.5]
        .iter()
        .map(|&l| {
            let params = WaveguideParams {
                guide_width_normal: 2.0,
                guide_width_undersized: 1.2,
                frequency: 0.35,
                segment_lengths: vec![10.0, l, 10.0],
                c: 1.0,
            };
            let m = waveguide_map(&params).unwrap();
            let rc = 2.0 * m.k * m.chi * (m.k * l).cos()
                + (m.chi.powi(2) - m.k.powi(2)) * (m.k * l).sin();
            assert!(rc.abs() > 0.1 * 2.0 * m.k * m.chi, "resonant length {l}");
            phase_time(&m.profile, m.constants, m.energy).unwrap().tau
        })
        .collect();
    assert!(max_rel_spread(&taus) < 1e-6, "{taus:?}");
}
