use rustfft::FftPlanner;

use crate::constants::PhysicalConstants;

use super::grid::WavepacketState;

fn spectrum(state: &WavepacketState) -> (Vec<f64>, Vec<f64>) {
    let n = state.psi.len();
    let mut buf = state.psi.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dk = std::f64::consts::TAU / (n as f64 * state.grid.dx());
    let ks = (0..n)
        .map(|j| if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 } * dk)
        .collect();
    (ks, buf.iter().map(|z| z.norm_sqr()).collect())
}

/// `⟨k⟩` from the discrete Fourier spectrum.
pub fn mean_momentum_spectral(state: &WavepacketState) -> f64 {
    let (ks, p) = spectrum(state);
    ks.iter().zip(&p).map(|(k, w)| k * w).sum::<f64>() / p.iter().sum::<f64>()
}

/// `⟨ħ²k²/2m⟩` from the discrete Fourier spectrum.
pub fn kinetic_energy_spectral(state: &WavepacketState, constants: PhysicalConstants) -> f64 {
    let (ks, p) = spectrum(state);
    let k2 = ks.iter().zip(&p).map(|(k, w)| k * k * w).sum::<f64>() / p.iter().sum::<f64>();
    k2 / constants.energy_to_k2()
}
