#![allow(dead_code)]

use lu_flow::noise::{
    eigenmode, max_noise_component, spectrum_labels, NoiseModel, StokesSpectrum,
};
use lu_flow::spectral::{SpectralVelocity, TorusGrid};

/// Modes mixing two wavevectors each, so `a` varies in space and `u_s ≠ 0`.
pub fn mixed_model(grid: &TorusGrid, scale: f64) -> NoiseModel {
    let spectrum = StokesSpectrum {
        k_modes: 8,
        exponent: 1.0,
        amplitude: 1.0,
    };
    let labels = spectrum_labels(&spectrum, Some(max_noise_component(grid)));
    let modes: Vec<SpectralVelocity> = (0..4)
        .map(|j| {
            let mut m = eigenmode(grid, &labels[j]);
            m.axpy(0.7, &eigenmode(grid, &labels[(j + 3) % 8]));
            m.scale(scale);
            m
        })
        .collect();
    NoiseModel::from_modes(grid, modes).expect("modes fit the band")
}
