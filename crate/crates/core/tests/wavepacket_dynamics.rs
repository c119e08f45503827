use std::f64::consts::PI;

use tunneltime_core::wavepacket::{
    evolve, init_gaussian, kinetic_energy_spectral, mean_momentum_spectral, simulate_arrival,
    simulate_arrival_observed, tail_advancement, GridSpec, PacketSpec, WavepacketState,
};
use tunneltime_core::{phase_time, transmission, PhysicalConstants, PotentialProfile};

fn nat() -> PhysicalConstants {
    PhysicalConstants::natural()
}

/// Carrier `k₀ = χ₀ = π/2` on barriers of `χa = 4`.
fn barriers(gap: f64) -> (PotentialProfile, f64) {
    let k0 = PI / 2.0;
    (
        PotentialProfile::double_barrier(4.0 / k0, gap, k0 * k0).unwrap(),
        k0,
    )
}

/// Coarser than the default resolution; enough for transmission and relative timing.
fn coarse(k0: f64, sigma_k0: f64) -> PacketSpec {
    let mut s = PacketSpec::with_bandwidth(k0, sigma_k0);
    s.dx = 0.1 / k0;
    s.dt = 0.04 / (k0 * k0);
    s
}

#[test]
fn transmitted_fraction_approaches_stationary_value() {
    let (p, k0) = barriers(2.0);
    let t2 = transmission(&p, nat(), nat().energy_of(k0))
        .unwrap()
        .probability();
    let errors: Vec<f64> = [25.0, 50.0, 100.0]
        .iter()
        .map(|&sk| {
            let run = simulate_arrival(&p, nat(), &coarse(k0, sk)).unwrap();
            (run.record.transmitted_fraction / t2 - 1.0).abs()
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[1] < 0.1, "{errors:?}");
}

#[test]
fn gap_is_crossed_without_delay() {
    let (k0, v) = (PI / 2.0, nat().velocity(PI / 2.0));
    let peaks: Vec<f64> = [2.0, 6.0]
        .iter()
        .map(|&g| {
            simulate_arrival(&barriers(g).0, nat(), &coarse(k0, 50.0))
                .unwrap()
                .record
                .t_peak
        })
        .collect();
    // Free flight over the extra 4 units would add 4/v.
    let free = 4.0 / v;
    assert!((peaks[1] - peaks[0]).abs() < 0.05 * free, "{peaks:?}");
}

#[test]
fn arrival_delay_tracks_phase_time() {
    let (p, k0) = barriers(2.0);
    let spec = coarse(k0, 50.0);
    let barrier = simulate_arrival(&p, nat(), &spec).unwrap();
    let free =
        simulate_arrival(&PotentialProfile::free(p.extent()).unwrap(), nat(), &spec).unwrap();
    assert_eq!(barrier.record.detector_x, free.record.detector_x);
    let v = nat().velocity(k0);
    let delay = barrier.record.t_peak - free.record.t_peak;
    let expected = phase_time(&p, nat(), nat().energy_of(k0)).unwrap().tau - p.extent() / v;
    // The transmitted spectrum is tilted towards higher k by the barrier; allow
    // 5% of the packet's duration σ/v.
    let tolerance = 0.05 * spec.sigma / v;
    assert!(
        (delay - expected).abs() < tolerance,
        "{delay} vs {expected}"
    );
    assert!(delay < 0.0);
}

#[test]
fn tail_shift_is_measured_against_free_flight() {
    let (p, k0) = barriers(2.0);
    let spec = coarse(k0, 25.0);
    // Snapshots at t = 0 and when the free centroid reaches the left edge.
    let arrival_step =
        (spec.start_offset * spec.sigma / nat().velocity(k0) / spec.dt).round() as usize;
    let snapshots = |profile: &PotentialProfile| {
        let mut kept: Vec<WavepacketState> = Vec::new();
        let mut step = 0;
        simulate_arrival_observed(profile, nat(), &spec, |s| {
            if step == 0 || step == arrival_step {
                kept.push(s.clone());
            }
            step += 1;
        })
        .unwrap();
        kept
    };
    let barrier = snapshots(&p);
    let free = snapshots(&PotentialProfile::free(p.extent()).unwrap());
    assert_eq!(barrier.len(), 2);
    assert_eq!(tail_advancement(&barrier[0], &free[0], 0.0), Some(0.0));
    let shift = tail_advancement(&barrier[1], &free[1], 0.0).unwrap();
    assert!(shift.is_finite() && shift.abs() < spec.sigma, "{shift}");
}

#[test]
fn budget_accounts_for_all_probability() {
    let (p, k0) = barriers(4.0);
    let run = simulate_arrival(&p, nat(), &coarse(k0, 25.0)).unwrap();
    let b = run.budget;
    assert!((b.reflected + b.inside + b.transmitted + b.absorbed - 1.0).abs() < 1e-9);
    assert!((b.transmitted / run.record.transmitted_fraction - 1.0).abs() < 0.05);
}

#[test]
fn gaussian_moments() {
    let grid = GridSpec::new(-400.0, 100.0, 1 << 15, 0.01).unwrap();
    for (k0, sigma) in [(1.0, 20.0), (2.0, 15.0)] {
        let s = init_gaussian(grid, -200.0, k0, sigma).unwrap();
        assert!((s.norm - 1.0).abs() < 1e-12);
        assert!((mean_momentum_spectral(&s) - k0).abs() < 1e-6);
        let e = kinetic_energy_spectral(&s, nat());
        let expected = 0.5 * k0 * k0 + 1.0 / (4.0 * sigma * sigma);
        assert!((e / expected - 1.0).abs() < 1e-9, "{e} vs {expected}");
    }
}

#[test]
fn free_norm_is_conserved() {
    let grid = GridSpec::new(-150.0, 150.0, 4096, 0.05).unwrap();
    let s = init_gaussian(grid, -60.0, 1.0, 10.0).unwrap();
    let out = evolve(s, &PotentialProfile::empty(), nat(), 10_000).unwrap();
    assert!((out.norm - 1.0).abs() < 1e-10);
}

#[test]
fn overlapping_packet_is_rejected() {
    let grid = GridSpec::new(-100.0, 100.0, 2048, 0.05).unwrap();
    assert!(init_gaussian(grid, -10.0, 1.0, 5.0).is_err());
    assert!(init_gaussian(grid, -98.0, 1.0, 5.0).is_err());
}
