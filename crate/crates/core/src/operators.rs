//! The operators of the pressure-free system
//!
//! ```text
//! dv + Av dt + B(v) dt + F_ε(v) dt = G_ε(v) dW
//! ```
//!
//! on the torus, with `ρ = 1`. Variable-coefficient terms are evaluated on
//! the padded grid and truncated, so every quadratic or cubic product is the
//! exact Galerkin projection and `(B(u, v), v)_H = 0` holds to round-off.
//!
//! The noise family is time independent, so the `ε² P ∂_t u_s` term of `F_ε`
//! is identically zero and is not evaluated. A time-dependent covariance
//! would add it in [`apply_f`] and [`explicit_increment`].

use std::sync::Arc;

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::spectral::{
    advection, derivative_coeffs, leray_project, leray_project_in_place, padded_gradient,
    SpectralScalar, SpectralVelocity, TorusGrid,
};

/// Grid, noise, noise scaling `ε` and Reynolds number.
#[derive(Clone, Debug)]
pub struct OperatorContext {
    grid: TorusGrid,
    noise: Arc<NoiseModel>,
    epsilon: f64,
    reynolds: f64,
}

impl OperatorContext {
    pub fn new(noise: Arc<NoiseModel>, epsilon: f64, reynolds: f64) -> Result<Self> {
        if !(reynolds.is_finite() && reynolds > 0.0) {
            return Err(Error::invalid("reynolds", "must be positive"));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::invalid("epsilon", "must lie in [0, 1]"));
        }
        Ok(Self {
            grid: noise.grid().clone(),
            noise,
            epsilon,
            reynolds,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn noise_handle(&self) -> Arc<NoiseModel> {
        Arc::clone(&self.noise)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn reynolds(&self) -> f64 {
        self.reynolds
    }

    /// Same noise and Reynolds number, different `ε`.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(Arc::clone(&self.noise), epsilon, self.reynolds)
    }

    /// False when `ε = 0` or every noise mode vanishes.
    pub fn noise_active(&self) -> bool {
        self.epsilon > 0.0 && !self.noise.is_silent()
    }

    /// Stokes eigenvalue `|k|²/Re`.
    pub fn stokes_eigenvalue(&self, k_squared: f64) -> f64 {
        k_squared / self.reynolds
    }
}

/// `Av = (1/Re)|k|² P v̂`.
pub fn apply_a(ctx: &OperatorContext, v: &SpectralVelocity) -> SpectralVelocity {
    let mut out = leray_project(v);
    let re = ctx.reynolds;
    out.apply_multiplier(|k2| k2 / re);
    out
}

/// `B(u, v) = P((u·∇) v)`.
pub fn apply_b(u: &SpectralVelocity, v: &SpectralVelocity) -> Result<SpectralVelocity> {
    let mut out = advection(u, v)?;
    leray_project_in_place(&mut out);
    Ok(out)
}

/// Trilinear form `b(u, v, w) = (w, (u·∇) v)_H`.
pub fn trilinear(u: &SpectralVelocity, v: &SpectralVelocity, w: &SpectralVelocity) -> Result<f64> {
    Ok(advection(u, v)?.inner(w))
}

/// Unprojected `∇·(a ∇v)`, one component at a time.
pub fn variance_diffusion(model: &NoiseModel, v: &SpectralVelocity) -> SpectralVelocity {
    let grad = padded_gradient(v);
    diffusion_from_gradient(model, &grad)
}

fn diffusion_from_gradient(model: &NoiseModel, grad: &[[Array2<f64>; 2]; 2]) -> SpectralVelocity {
    let grid = model.grid();
    let mut comps = [grid.zeros(), grid.zeros()];
    for (m, comp) in comps.iter_mut().enumerate() {
        *comp = divergence_of_flux(model, &grad[m]);
    }
    let [a, b] = comps;
    SpectralVelocity::from_coeffs(grid, a, b).expect("same grid")
}

/// `Σ_i ∂_i P_N(Σ_j a_ij g_j)` for a padded gradient `g`.
fn divergence_of_flux(model: &NoiseModel, g: &[Array2<f64>; 2]) -> ndarray::Array2<num_complex::Complex64> {
    let grid = model.grid();
    let [a11, a12, a22] = model.padded_variance();
    let rows: [[&Array2<f64>; 2]; 2] = [[a11, a12], [a12, a22]];
    let mut out = grid.zeros();
    for (i, row) in rows.iter().enumerate() {
        let mut flux = row[0] * &g[0];
        Zip::from(&mut flux)
            .and(row[1])
            .and(&g[1])
            .for_each(|f, &a, &d| *f += a * d);
        out += &derivative_coeffs(grid, &grid.from_padded(&flux), i);
    }
    out
}

/// `∇·(a ∇q)` for a scalar.
pub fn scalar_variance_diffusion(model: &NoiseModel, q: &SpectralScalar) -> SpectralScalar {
    let grid = model.grid();
    let g = [
        grid.to_padded(&derivative_coeffs(grid, q.coeffs(), 0)),
        grid.to_padded(&derivative_coeffs(grid, q.coeffs(), 1)),
    ];
    SpectralScalar::from_coeffs(grid, divergence_of_flux(model, &g)).expect("same grid")
}

/// LU drift
/// `F_ε(v) = ε² B(v, u_s) - (ε²/2) P ∇·(a∇v) - (ε⁴/2) P ∇·(a∇u_s) - ε² A u_s`.
pub fn apply_f(ctx: &OperatorContext, v: &SpectralVelocity) -> Result<SpectralVelocity> {
    let eps = ctx.epsilon;
    let mut out = SpectralVelocity::zeros(&ctx.grid);
    if eps == 0.0 {
        return Ok(out);
    }
    let eps2 = eps * eps;
    let us = ctx.noise.ito_stokes_drift();
    out.axpy(eps2, &apply_b(v, us)?);
    out.axpy(-0.5 * eps2, &leray_project(&variance_diffusion(&ctx.noise, v)));
    out.axpy(
        -0.5 * eps2 * eps2,
        &leray_project(&variance_diffusion(&ctx.noise, us)),
    );
    out.axpy(-eps2, &apply_a(ctx, us));
    Ok(out)
}

/// `G_ε(v) φ_k = -ε A φ_k - ε B(φ_k, v) - ε³ B(φ_k, u_s)`.
pub fn apply_g_column(
    ctx: &OperatorContext,
    v: &SpectralVelocity,
    k: usize,
) -> Result<SpectralVelocity> {
    let phi = ctx.noise.mode(k)?;
    let eps = ctx.epsilon;
    let mut out = SpectralVelocity::zeros(&ctx.grid);
    if eps == 0.0 {
        return Ok(out);
    }
    out.axpy(-eps, &apply_a(ctx, phi));
    out.axpy(-eps, &apply_b(phi, v)?);
    out.axpy(-eps * eps * eps, &apply_b(phi, ctx.noise.ito_stokes_drift())?);
    Ok(out)
}

/// `G_ε(v) dW = Σ_k G_ε(v) φ_k dβ_k`.
pub fn noise_increment(
    ctx: &OperatorContext,
    v: &SpectralVelocity,
    d_beta: &[f64],
) -> Result<SpectralVelocity> {
    let k_modes = ctx.noise.k_modes();
    if d_beta.len() != k_modes {
        return Err(Error::IncrementLength {
            expected: k_modes,
            found: d_beta.len(),
        });
    }
    let mut out = SpectralVelocity::zeros(&ctx.grid);
    for (k, &db) in d_beta.iter().enumerate() {
        if db != 0.0 {
            out.axpy(db, &apply_g_column(ctx, v, k)?);
        }
    }
    Ok(out)
}

/// `v = u - ε² P u_s`.
pub fn change_of_variable(u: &SpectralVelocity, ctx: &OperatorContext) -> SpectralVelocity {
    let mut v = u.clone();
    let eps2 = ctx.epsilon * ctx.epsilon;
    if eps2 > 0.0 {
        v.axpy(-eps2, &leray_project(ctx.noise.ito_stokes_drift()));
    }
    v
}

/// `u = v + ε² P u_s`.
pub fn inverse_change(v: &SpectralVelocity, ctx: &OperatorContext) -> SpectralVelocity {
    let mut u = v.clone();
    let eps2 = ctx.epsilon * ctx.epsilon;
    if eps2 > 0.0 {
        u.axpy(eps2, &leray_project(ctx.noise.ito_stokes_drift()));
    }
    u
}

/// `Σ_k ∫ |(φ_k·∇) v|² dx`, integrated exactly on the padded grid.
pub fn noise_dirichlet_form(ctx: &OperatorContext, v: &SpectralVelocity) -> f64 {
    let grad = padded_gradient(v);
    let grid = &ctx.grid;
    ctx.noise
        .padded_modes()
        .iter()
        .map(|phi| {
            let mut total = 0.0;
            for g in &grad {
                let mut d = &phi[0] * &g[0];
                Zip::from(&mut d)
                    .and(&phi[1])
                    .and(&g[1])
                    .for_each(|s, &p, &q| *s += p * q);
                d.mapv_inplace(|x| x * x);
                total += grid.padded_integral(&d);
            }
            total
        })
        .sum()
}

/// `(a ∇v, ∇v)_H`, computed on the drift side as `-(∇·(a∇v), v)_H`.
pub fn diffusion_dirichlet_form(ctx: &OperatorContext, v: &SpectralVelocity) -> f64 {
    -variance_diffusion(&ctx.noise, v).inner(v)
}

/// Explicit part of one Euler–Maruyama step,
/// `-dt (B(v) + F_ε(v)) + G_ε(v) dW`, evaluated in a single padded-grid pass.
/// Passing `d_beta = None` drops the martingale term.
pub fn explicit_increment(
    ctx: &OperatorContext,
    v: &SpectralVelocity,
    d_beta: Option<&[f64]>,
    dt: f64,
) -> Result<SpectralVelocity> {
    let grid = &ctx.grid;
    let up = v.padded();
    let gv = padded_gradient(v);

    // (u·∇)v summed over j, scaled.
    let accumulate = |acc: &mut Array2<f64>, vel: &[Array2<f64>; 2], grad: &[Array2<f64>; 2], s: f64| {
        Zip::from(&mut *acc)
            .and(&vel[0])
            .and(&grad[0])
            .and(&vel[1])
            .and(&grad[1])
            .for_each(|a, &v0, &g0, &v1, &g1| *a += s * (v0 * g0 + v1 * g1));
    };

    let m = grid.padded_len();
    let mut adv = [Array2::<f64>::zeros((m, m)), Array2::<f64>::zeros((m, m))];
    for (c, acc) in adv.iter_mut().enumerate() {
        accumulate(acc, &up, &gv[c], dt);
    }

    if !ctx.noise_active() {
        let [a, b] = adv;
        let mut out = SpectralVelocity::from_coeffs(grid, grid.from_padded(&a), grid.from_padded(&b))?;
        out.scale(-1.0);
        leray_project_in_place(&mut out);
        return Ok(out);
    }

    let eps = ctx.epsilon;
    let eps2 = eps * eps;
    let noise = &ctx.noise;
    let gus = noise.padded_drift_gradient();
    let us = noise.ito_stokes_drift();

    for (c, acc) in adv.iter_mut().enumerate() {
        accumulate(acc, &up, &gus[c], dt * eps2);
    }

    let sigma_dw = match d_beta {
        Some(db) => Some(noise.combine(db)?),
        None => None,
    };
    if let Some(w) = &sigma_dw {
        let wp = w.padded();
        for (c, acc) in adv.iter_mut().enumerate() {
            accumulate(acc, &wp, &gv[c], eps);
            accumulate(acc, &wp, &gus[c], eps * eps2);
        }
    }

    // ∇·(a∇(v + ε² u_s)) carries both diffusion terms of F_ε.
    let mut shifted = gv;
    for c in 0..2 {
        for j in 0..2 {
            Zip::from(&mut shifted[c][j])
                .and(&gus[c][j])
                .for_each(|s, &g| *s += eps2 * g);
        }
    }
    let diffusion = diffusion_from_gradient(noise, &shifted);

    let [a, b] = adv;
    let mut out = SpectralVelocity::from_coeffs(grid, grid.from_padded(&a), grid.from_padded(&b))?;
    out.scale(-1.0);
    out.axpy(0.5 * eps2 * dt, &diffusion);
    let re = ctx.reynolds;
    let mut linear = us.scaled(dt * eps2);
    if let Some(w) = &sigma_dw {
        linear.axpy(-eps, w);
    }
    linear.apply_multiplier(|k2| k2 / re);
    out += &linear;
    leray_project_in_place(&mut out);
    Ok(out)
}
