//! Shape of the packet ahead of the profile, compared with a free reference.

use super::grid::WavepacketState;

/// Leftmost position where `|ψ|²` reaches half of its maximum over `x < x_edge`,
/// linearly interpolated between grid points.
pub fn trailing_half_max(state: &WavepacketState, x_edge: f64) -> Option<f64> {
    let region: Vec<(f64, f64)> = state.density().take_while(|&(x, _)| x < x_edge).collect();
    let peak = region.iter().map(|&(_, d)| d).fold(0.0, f64::max);
    if peak <= 0.0 {
        return None;
    }
    let half = 0.5 * peak;
    let i = region.iter().position(|&(_, d)| d >= half)?;
    if i == 0 {
        return None;
    }
    let ((x0, d0), (x1, d1)) = (region[i - 1], region[i]);
    Some(x0 + (half - d0) / (d1 - d0) * (x1 - x0))
}

/// Shift of the trailing half-maximum relative to `reference` at the same time.
/// Positive when the tail sits further right than in free flight.
pub fn tail_advancement(
    state: &WavepacketState,
    reference: &WavepacketState,
    x_edge: f64,
) -> Option<f64> {
    Some(trailing_half_max(state, x_edge)? - trailing_half_max(reference, x_edge)?)
}
