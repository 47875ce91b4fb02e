use ndarray::Array2;

use crate::error::{Error, Result};
use crate::operators::{explicit_increment, OperatorContext};
use crate::spectral::{leray_project_in_place, SpectralVelocity};

/// Euler–Maruyama step with the Stokes operator integrated exactly:
///
/// ```text
/// v⁺ = e^{-dt |k|²/Re} ∘ [v - dt (B(v) + F_ε(v)) + G_ε(v) Δβ]
/// ```
///
/// followed by re-projection and Hermitian symmetrization.
#[derive(Clone, Debug)]
pub struct Stepper {
    ctx: OperatorContext,
    dt: f64,
    decay: Array2<f64>,
}

impl Stepper {
    pub fn new(ctx: OperatorContext, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        let grid = ctx.grid();
        let n = grid.n_modes();
        let re = ctx.reynolds();
        let decay = Array2::from_shape_fn((n, n), |(i, j)| (-dt * grid.k_squared(i, j) / re).exp());
        Ok(Self { ctx, dt, decay })
    }

    pub fn context(&self) -> &OperatorContext {
        &self.ctx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `v` by one step. `d_beta = None` drops the martingale term;
    /// with `ε = 0` or a silent noise model the increments are ignored.
    pub fn advance(&self, v: &SpectralVelocity, d_beta: Option<&[f64]>) -> Result<SpectralVelocity> {
        let mut next = v.clone();
        next += &explicit_increment(&self.ctx, v, d_beta, self.dt)?;
        for comp in next.comps_mut() {
            ndarray::Zip::from(comp)
                .and(&self.decay)
                .for_each(|c, &d| *c *= d);
        }
        leray_project_in_place(&mut next);
        next.symmetrize();
        Ok(next)
    }
}

/// One step from `state` driven by the increments `d_beta`.
pub fn step(
    state: &SpectralVelocity,
    ctx: &OperatorContext,
    d_beta: &[f64],
    dt: f64,
) -> Result<SpectralVelocity> {
    let next = Stepper::new(ctx.clone(), dt)?.advance(state, Some(d_beta))?;
    if !next.is_finite() {
        return Err(Error::BlowUp { step: 0, time: dt });
    }
    Ok(next)
}
