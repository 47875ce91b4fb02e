use ndarray::Zip;

use crate::noise::NoiseModel;
use crate::operators::scalar_variance_diffusion;
use crate::spectral::{derivative_coeffs, SpectralScalar};

/// The two halves of the scalar energy balance under transport noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportBudget {
    /// `(ε²/2) ∫ q ∇·(a∇q) dx`
    pub diffusion_loss: f64,
    /// `(ε²/2) ∫ ∇qᵀ a ∇q dx`
    pub noise_intake: f64,
    pub residual: f64,
}

impl TransportBudget {
    /// `|residual| / |noise_intake|`, zero when both vanish.
    pub fn relative_residual(&self) -> f64 {
        if self.noise_intake == 0.0 {
            self.residual.abs()
        } else {
            (self.residual / self.noise_intake).abs()
        }
    }
}

/// Evaluates both terms independently: the loss from the spectral
/// divergence form, the intake by quadrature of `∇qᵀ a ∇q` on the padded
/// grid.
pub fn energy_budget_transport(q: &SpectralScalar, model: &NoiseModel, epsilon: f64) -> TransportBudget {
    let half_eps2 = 0.5 * epsilon * epsilon;
    let diffusion_loss = half_eps2 * q.inner(&scalar_variance_diffusion(model, q));

    let grid = model.grid();
    let gx = grid.to_padded(&derivative_coeffs(grid, q.coeffs(), 0));
    let gy = grid.to_padded(&derivative_coeffs(grid, q.coeffs(), 1));
    let [a11, a12, a22] = model.padded_variance();
    let mut density = gx.clone();
    Zip::from(&mut density)
        .and(&gx)
        .and(&gy)
        .and(a11)
        .and(a12)
        .and(a22)
        .for_each(|d, &x, &y, &p, &r, &s| *d = p * x * x + 2.0 * r * x * y + s * y * y);
    let noise_intake = half_eps2 * grid.padded_integral(&density);

    TransportBudget {
        diffusion_loss,
        noise_intake,
        residual: diffusion_loss + noise_intake,
    }
}
