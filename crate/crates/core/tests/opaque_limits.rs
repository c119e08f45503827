use std::f64::consts::PI;

use num_complex::Complex64;
use tunneltime_core::asymptotics::exact_a_factor;
use tunneltime_core::{
    opaque_amplitudes, solve_double_barrier_direct, DoubleBarrier, PhysicalConstants,
};

fn nat() -> PhysicalConstants {
    PhysicalConstants::natural()
}

fn kinematics(e: f64) -> (f64, f64) {
    ((2.0 * e).sqrt(), (2.0 * (1.0 - e)).sqrt())
}

fn limit_error(e: f64, a: f64, gap: f64) -> f64 {
    let (k, chi) = kinematics(e);
    let g = DoubleBarrier::new(a, gap, 1.0).unwrap();
    let exact = solve_double_barrier_direct(&g, nat(), e).unwrap();
    let limit = opaque_amplitudes(k, chi, a, a + gap)
        .unwrap()
        .as_coefficients();
    exact.max_relative_difference(&limit)
}

#[test]
fn coefficients_converge_like_the_dropped_terms() {
    for (e, gap) in [(0.5, 3.0), (0.3, 1.2), (0.7, 2.4)] {
        let (_, chi) = kinematics(e);
        // χa from 3 to 6: doubling a shrinks the error by at least e^{−χa}.
        let a = 3.0 / chi;
        let (e1, e2) = (limit_error(e, a, gap), limit_error(e, 2.0 * a, gap));
        assert!(e2 <= e1 * (-chi * a).exp(), "E = {e}: {e1:e} -> {e2:e}");
        // Past the precision floor the error stays at rounding level.
        assert!(limit_error(e, 25.0 / chi, gap) < 1e-13);
    }
}

#[test]
fn amplitude_factor_becomes_real() {
    let mut last = f64::INFINITY;
    for chi_a in [4.0, 6.0, 8.0, 10.0, 12.0] {
        let g = DoubleBarrier::new(chi_a, 3.0, 1.0).unwrap();
        let exact = solve_double_barrier_direct(&g, nat(), 0.5).unwrap();
        let a = exact_a_factor(&exact, 1.0, 1.0, chi_a, g.l());
        let ratio = (a.im / a.re).abs();
        assert!(ratio < last);
        last = ratio;
        let printed = opaque_amplitudes(1.0, 1.0, chi_a, g.l()).unwrap().a_factor;
        assert!((a.re / printed - 1.0).abs() < 10.0 * (-2.0 * chi_a).exp());
    }
    assert!(last < 1e-10);
}

#[test]
fn transmitted_phase_is_independent_of_width_and_separation() {
    // arg(T₁T₂ e^{ik(L+a)}) up to the sign of the real factor A, which flips with cos(k·gap).
    let (k, chi) = kinematics(0.5);
    let mut phases = Vec::new();
    for i in 0..20 {
        let a = 5.0 + i as f64;
        for j in 0..20 {
            let gap = 0.2 + 0.45 * j as f64;
            if ((k * gap).cos()).abs() < 0.05 {
                continue;
            }
            let amp = opaque_amplitudes(k, chi, a, a + gap).unwrap();
            let z = amp.total_transmission() * Complex64::from_polar(1.0, k * (2.0 * a + gap));
            phases.push((z * amp.a_factor.signum()).arg());
        }
    }
    assert!(phases.len() >= 340);
    let p0 = phases[0];
    let wrapped = |d: f64| ((d + PI).rem_euclid(2.0 * PI) - PI).abs();
    let worst = phases.iter().map(|p| wrapped(p - p0)).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
    // −4ikχ/(ik−χ)² at k = χ is −4i/(i−1)² = 2.
    assert!(p0.abs() < 1e-12);
}
