//! Location-uncertainty noise: weighted eigenmodes, variance tensor,
//! Itô–Stokes drift, Brownian increments and regularity reporting.

mod model;
mod regularity;
mod wiener;

pub use model::{
    build_noise_model, eigenmode, half_plane_wavevectors, ito_stokes_drift, max_noise_component,
    spectrum_labels, spectrum_weight, variance_tensor, ModeLabel, NoiseModel, Polarization,
    StokesSpectrum, VarianceTensor,
};
pub use regularity::{
    check_regularity, family_partial_sums, RegularityReport, SOBOLEV_INDEX, TAIL_THRESHOLD,
};
pub use wiener::{sample_increments, WienerPath, SELF_CHECK_MIN_SAMPLES};
