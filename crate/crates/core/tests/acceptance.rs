//! Acceptance criteria 1–10. Each test prints one PASS/FAIL line to stdout
//! (written directly, so it shows even when test output is captured).

use std::io::Write;

use tunneltime_core::harness::reproduce::{self, CheckOutcome, DEFAULT_SEED};

fn report(outcome: &CheckOutcome) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "acceptance {outcome}");
    let _ = out.flush();
}

fn require(outcome: CheckOutcome) -> CheckOutcome {
    report(&outcome);
    assert!(
        outcome.within_tolerance(),
        "criterion {} out of tolerance: {outcome}",
        outcome.id
    );
    assert!(
        outcome.within_budget(),
        "criterion {} over budget: {outcome}",
        outcome.id
    );
    outcome
}

/// `2m/(ħkχ)` from scratch for `ħ = m = 1`, `E = 0.5`, `V₀ = 1`.
fn opaque_delay() -> f64 {
    let (e, v0) = (0.5f64, 1.0f64);
    let k = (2.0 * e).sqrt();
    let chi = (2.0 * (v0 - e)).sqrt();
    2.0 / (k * chi)
}

/// Bisection on the cavity condition `2kχ cos(kg) + (χ² − k²) sin(kg) = 0`.
fn cavity_resonance(v0: f64, gap: f64, mut lo: f64, mut hi: f64) -> f64 {
    let f = |e: f64| {
        let k = (2.0 * e).sqrt();
        let chi = (2.0 * (v0 - e)).sqrt();
        2.0 * k * chi * (k * gap).cos() + (chi * chi - k * k) * (k * gap).sin()
    };
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_01_canonical_point() {
    let o = require(reproduce::check_canonical_point());
    assert_eq!(o.target, opaque_delay());
}

#[test]
fn criterion_02_width_plateau() {
    let o = require(reproduce::check_width_plateau());
    assert!((o.measured - opaque_delay()).abs() < 1e-6);
}

#[test]
fn criterion_03_gap_independence() {
    let o = require(reproduce::check_gap_independence());
    assert!((o.measured - opaque_delay()).abs() < 1e-4);
}

#[test]
fn criterion_04_barrier_trains() {
    require(reproduce::check_barrier_trains());
}

#[test]
fn criterion_05_unitarity() {
    require(reproduce::check_unitarity(DEFAULT_SEED));
}

#[test]
fn criterion_06_oracle_equivalence() {
    assert_eq!(reproduce::oracle_grid().len(), 100);
    require(reproduce::check_oracle_equivalence());
}

#[test]
fn criterion_07_opaque_convergence() {
    let o = require(reproduce::check_opaque_convergence());
    assert!((0.5..=2.0).contains(&o.measured));
}

#[test]
fn criterion_08_resonance_fit() {
    let o = require(reproduce::check_resonance_fit());
    let predicted = cavity_resonance(1.0, std::f64::consts::FRAC_PI_2, 0.3, 0.7);
    assert!(
        (o.target - predicted).abs() < 1e-10,
        "{} vs {predicted}",
        o.target
    );
}

#[test]
fn criterion_09_dynamic_gap_independence() {
    require(reproduce::check_dynamic_gap_independence());
}

#[test]
fn criterion_10_free_space() {
    require(reproduce::check_free_space());
}
