//! Fourier representation of periodic fields on the 2D torus.

mod field;
mod grid;
mod ops;
pub mod snapshot;

pub use field::{SpectralScalar, SpectralVelocity};
pub use grid::{TorusGrid, SIDE_LENGTH};
pub use ops::{
    advection, dealiased_product, leray_project, leray_project_in_place, padded_gradient,
    spectral_derivative,
};
pub(crate) use ops::derivative_coeffs;
