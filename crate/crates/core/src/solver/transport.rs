use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::noise::WienerPath;
use crate::operators::{scalar_variance_diffusion, OperatorContext};
use crate::spectral::{derivative_coeffs, SpectralScalar, SpectralVelocity};

/// Velocity carrying the scalar.
#[derive(Clone, Copy, Debug)]
pub enum AdvectingVelocity<'a> {
    Steady(&'a SpectralVelocity),
    /// Piecewise constant in time: `fields[i]` holds on `[times[i], times[i+1])`.
    Sampled {
        times: &'a [f64],
        fields: &'a [SpectralVelocity],
    },
}

impl<'a> AdvectingVelocity<'a> {
    fn at(&self, t: f64) -> &'a SpectralVelocity {
        match *self {
            AdvectingVelocity::Steady(u) => u,
            AdvectingVelocity::Sampled { times, fields } => {
                let idx = times.partition_point(|&s| s <= t).saturating_sub(1);
                &fields[idx.min(fields.len() - 1)]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let AdvectingVelocity::Sampled { times, fields } = self {
            if fields.is_empty() || times.len() != fields.len() {
                return Err(Error::invalid("velocity", "need one field per sample time"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ScalarTrajectory {
    /// Times of every step, starting at 0.
    pub times: Vec<f64>,
    /// `½ |q|²` at each time.
    pub energies: Vec<f64>,
    pub final_state: SpectralScalar,
}

impl ScalarTrajectory {
    /// `|E(T) - E(0)| / E(0)`.
    pub fn relative_drift(&self) -> f64 {
        self.signed_relative_drift().abs()
    }

    /// `(E(T) - E(0)) / E(0)`.
    pub fn signed_relative_drift(&self) -> f64 {
        let e0 = self.energies[0];
        (self.energies[self.energies.len() - 1] - e0) / e0
    }
}

/// Explicit Euler–Maruyama increment of
/// `dq = -(u - ε²u_s)·∇q dt - ε σdW·∇q + (ε²/2) ∇·(a∇q) dt`.
pub fn scalar_increment(
    ctx: &OperatorContext,
    q: &SpectralScalar,
    u: &SpectralVelocity,
    d_beta: Option<&[f64]>,
    dt: f64,
) -> Result<SpectralScalar> {
    let grid = ctx.grid();
    if q.grid() != u.grid() || q.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let active = ctx.noise_active();
    let eps = ctx.epsilon();

    // Effective displacement over the step, w = dt (u - ε² u_s) + ε σdW.
    let mut w = u.scaled(dt);
    if active {
        let noise = ctx.noise();
        w.axpy(-dt * eps * eps, noise.ito_stokes_drift());
        if let Some(db) = d_beta {
            w.axpy(eps, &noise.combine(db)?);
        }
    }
    let wp = w.padded();
    let g = [
        grid.to_padded(&derivative_coeffs(grid, q.coeffs(), 0)),
        grid.to_padded(&derivative_coeffs(grid, q.coeffs(), 1)),
    ];
    let m = grid.padded_len();
    let mut adv = Array2::<f64>::zeros((m, m));
    Zip::from(&mut adv)
        .and(&wp[0])
        .and(&g[0])
        .and(&wp[1])
        .and(&g[1])
        .for_each(|a, &w0, &g0, &w1, &g1| *a = -(w0 * g0 + w1 * g1));
    let mut out = SpectralScalar::from_coeffs(grid, grid.from_padded(&adv))?;
    if active {
        out.axpy(0.5 * eps * eps * dt, &scalar_variance_diffusion(ctx.noise(), q));
    }
    Ok(out)
}

/// Integrates the stochastic transport of `q0` by `velocity` up to `t_end`.
pub fn run_scalar_transport(
    q0: &SpectralScalar,
    velocity: AdvectingVelocity<'_>,
    ctx: &OperatorContext,
    dt: f64,
    t_end: f64,
    path: Option<&WienerPath>,
) -> Result<ScalarTrajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(Error::invalid("T", "must be at least dt"));
    }
    velocity.validate()?;
    let n_steps = (t_end / dt).round() as usize;
    if let Some(p) = path {
        if p.n_modes() != ctx.noise().k_modes() {
            return Err(Error::IncrementLength {
                expected: ctx.noise().k_modes(),
                found: p.n_modes(),
            });
        }
        if p.n_steps() < n_steps {
            return Err(Error::StepOutOfRange {
                step: n_steps - 1,
                n_steps: p.n_steps(),
            });
        }
    }
    let mut q = q0.clone();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut energies = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    energies.push(0.5 * q.l2_norm().powi(2));
    for s in 0..n_steps {
        let t = s as f64 * dt;
        let d_beta = match path {
            Some(p) => Some(p.sample_increments(s)?),
            None => None,
        };
        let incr = scalar_increment(ctx, &q, velocity.at(t), d_beta, dt)?;
        q.axpy(1.0, &incr);
        q.symmetrize();
        let time = (s + 1) as f64 * dt;
        if !q.is_finite() {
            return Err(Error::BlowUp { step: s + 1, time });
        }
        times.push(time);
        energies.push(0.5 * q.l2_norm().powi(2));
    }
    Ok(ScalarTrajectory {
        times,
        energies,
        final_state: q,
    })
}
