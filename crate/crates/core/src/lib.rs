//! Spectral Galerkin simulation of the 2D stochastic Navier–Stokes equations
//! under location-uncertainty transport noise, with the verification
//! machinery for its structural properties.
//!
//! The state is a divergence-free velocity on the periodic torus `[0, 2π)²`,
//! stored as truncated Fourier coefficients ([`spectral`]). The noise is built
//! from weighted Stokes eigenmodes ([`noise`]), the pressure-free drift and
//! diffusion operators live in [`operators`], and [`solver`] integrates the
//! Galerkin SDE with an Euler–Maruyama step that treats viscosity exactly.
//! [`diagnostics`] turns runs into energy, contraction and vanishing-noise
//! convergence reports.

pub mod diagnostics;
pub mod ensemble;
pub mod error;
pub mod noise;
pub mod operators;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
