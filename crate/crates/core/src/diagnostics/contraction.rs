use crate::ensemble::{map_members, Execution};
use crate::error::{Error, Result};
use crate::noise::WienerPath;
use crate::solver::{initial_state, member_path, random_band, SolverConfig, Stepper};
use crate::spectral::SpectralVelocity;

use super::estimates::antithetic_path;

/// Multipliers of `Re` tried for the weight constant `α`.
pub const ALPHA_SWEEP: [f64; 4] = [1.0, 2.0, 5.0, 10.0];

/// Seed of the fixed perturbation direction.
const PERTURBATION_SEED: u64 = 0x5eed;

/// Weighted difference of two runs driven by one path. The weight
/// `e(t) = exp(-α ∫₀ᵗ ‖v₂‖²_V)` underflows quickly, so logarithms are kept
/// alongside the raw values.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub times: Vec<f64>,
    /// `log e(t)`
    pub log_weights: Vec<f64>,
    /// `|Ṽ(t)|²_H`
    pub diffs: Vec<f64>,
    /// `e(t) |Ṽ(t)|²_H`
    pub weighted_diffs: Vec<f64>,
    /// `|Ṽ(0)|² exp(Ĉ ε² t)`
    pub bound_curve: Vec<f64>,
    /// Smallest `Ĉ ≥ 0` for which this run stays under the bound curve.
    pub fitted_c: f64,
}

impl ContractionReport {
    pub fn log_weighted_diffs(&self) -> Vec<f64> {
        self.diffs
            .iter()
            .zip(&self.log_weights)
            .map(|(d, w)| d.ln() + w)
            .collect()
    }

    /// The weighted difference never rises above its initial value times
    /// `exp(c ε² t)` (compared in log space, with relative slack `tol`).
    pub fn bounded_by(&self, c: f64, tol: f64) -> bool {
        let d0 = self.diffs[0];
        if d0 == 0.0 {
            return self.diffs.iter().all(|d| *d == 0.0);
        }
        let eps2 = self.epsilon * self.epsilon;
        self.log_weighted_diffs()
            .iter()
            .zip(&self.times)
            .all(|(lw, &t)| *lw <= d0.ln() + c * eps2 * t + tol.ln_1p())
    }

    pub fn non_increasing(&self, tol: f64) -> bool {
        self.log_weighted_diffs()
            .windows(2)
            .all(|w| w[1] <= w[0] + tol.ln_1p())
    }
}

/// `v₁(0) + δ |v₁(0)|_H w` with `w` a fixed unit random-band direction.
pub fn perturbed(v: &SpectralVelocity, delta: f64) -> SpectralVelocity {
    if delta == 0.0 {
        return v.clone();
    }
    let w = random_band(v.grid(), 1.0, 4.0, 0.5, PERTURBATION_SEED);
    let mut out = v.clone();
    out.axpy(delta * v.h_norm(), &w);
    out
}

/// Raw twin trajectories: recorded times, `|Ṽ|²_H` and `‖v₂‖²_V`.
#[derive(Clone, Debug)]
pub struct TwinRun {
    pub times: Vec<f64>,
    pub diffs: Vec<f64>,
    pub enstrophy2: Vec<f64>,
    pub final_states: [SpectralVelocity; 2],
}

impl TwinRun {
    /// `log e(t)` by the trapezoid rule on the recorded `‖v₂‖²_V`.
    pub fn log_weights(&self, alpha: f64) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for i in 1..self.times.len() {
            let dt = self.times[i] - self.times[i - 1];
            acc += 0.5 * dt * (self.enstrophy2[i] + self.enstrophy2[i - 1]);
            out.push(-alpha * acc);
        }
        out
    }

    pub fn report(&self, alpha: f64, epsilon: f64, delta: f64) -> ContractionReport {
        let log_weights = self.log_weights(alpha);
        let weighted_diffs: Vec<f64> = self
            .diffs
            .iter()
            .zip(&log_weights)
            .map(|(d, w)| d * w.exp())
            .collect();
        let d0 = self.diffs[0];
        let eps2 = epsilon * epsilon;
        let mut fitted_c: f64 = 0.0;
        if d0 > 0.0 && eps2 > 0.0 {
            for ((d, w), &t) in self.diffs.iter().zip(&log_weights).zip(&self.times).skip(1) {
                fitted_c = fitted_c.max((d.ln() + w - d0.ln()) / (eps2 * t));
            }
        }
        let bound_curve = self
            .times
            .iter()
            .map(|&t| d0 * (fitted_c * eps2 * t).exp())
            .collect();
        ContractionReport {
            alpha,
            epsilon,
            delta,
            times: self.times.clone(),
            log_weights,
            diffs: self.diffs.clone(),
            weighted_diffs,
            bound_curve,
            fitted_c,
        }
    }
}

/// Integrates `v₁` from the configured start and `v₂` from its perturbation
/// along the same path, in lockstep.
pub fn twin_run(config: &SolverConfig, delta: f64, path: Option<&WienerPath>) -> Result<TwinRun> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("delta", "must be finite and non-negative"));
    }
    let ctx = config.context()?;
    let stepper = Stepper::new(ctx.clone(), config.dt)?;
    let mut v1 = initial_state(config, &ctx)?;
    let mut v2 = perturbed(&v1, delta);
    let n_steps = config.n_steps();
    let record = |v1: &SpectralVelocity, v2: &SpectralVelocity| ((v1 - v2).h_norm().powi(2), v2.v_norm().powi(2));
    let (d, e) = record(&v1, &v2);
    let (mut times, mut diffs, mut enstrophy2) = (vec![0.0], vec![d], vec![e]);
    for s in 0..n_steps {
        let d_beta = match path {
            Some(p) => Some(p.sample_increments(s)?),
            None => None,
        };
        v1 = stepper.advance(&v1, d_beta)?;
        v2 = stepper.advance(&v2, d_beta)?;
        let done = s + 1;
        let time = done as f64 * config.dt;
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::BlowUp { step: done, time });
        }
        if done % config.record_every == 0 || done == n_steps {
            let (d, e) = record(&v1, &v2);
            times.push(time);
            diffs.push(d);
            enstrophy2.push(e);
        }
    }
    Ok(TwinRun {
        times,
        diffs,
        enstrophy2,
        final_states: [v1, v2],
    })
}

/// Twin runs of `member` with weight constant `alpha`.
pub fn contraction_test(
    config: &SolverConfig,
    delta: f64,
    member: u64,
    alpha: f64,
) -> Result<ContractionReport> {
    let ctx = config.context()?;
    let path = member_path(config, &ctx, member)?;
    Ok(twin_run(config, delta, path.as_ref())?.report(alpha, config.epsilon, delta))
}

/// Sweeps `α ∈ {1, 2, 5, 10}·Re` on one twin run and returns the reports
/// with the smallest `α` whose weighted difference is non-increasing up to
/// `exp(c ε² t)`, if any.
pub fn alpha_sweep(
    config: &SolverConfig,
    delta: f64,
    member: u64,
    c: f64,
) -> Result<(Vec<ContractionReport>, Option<f64>)> {
    let ctx = config.context()?;
    let path = member_path(config, &ctx, member)?;
    let twins = twin_run(config, delta, path.as_ref())?;
    let reports: Vec<ContractionReport> = ALPHA_SWEEP
        .iter()
        .map(|m| twins.report(m * config.reynolds, config.epsilon, delta))
        .collect();
    let smallest = reports
        .iter()
        .find(|r| r.bounded_by(c, 1e-12))
        .map(|r| r.alpha);
    Ok((reports, smallest))
}

/// Noise-induced growth constant of the weighted difference.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionStudy {
    pub alpha: f64,
    pub delta: f64,
    pub ensemble_size: usize,
    pub epsilons: Vec<f64>,
    pub times: Vec<f64>,
    /// Ensemble mean over antithetic pairs of
    /// `log(e_ε|Ṽ_ε|²) - log(e₀|Ṽ₀|²)` at each time, per `ε`.
    pub mean_log_excess: Vec<Vec<f64>>,
    /// `Ĉ(ε)`: smallest constant with `mean_log_excess ≤ Ĉ ε² t`.
    pub c_hat: Vec<f64>,
    /// Reports of member 0 at each `ε`.
    pub reports: Vec<ContractionReport>,
}

impl ContractionStudy {
    /// `max Ĉ / min Ĉ - 1`.
    pub fn spread(&self) -> f64 {
        let max = self.c_hat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.c_hat.iter().copied().fold(f64::INFINITY, f64::min);
        max / min - 1.0
    }

    /// Largest relative deviation of any `Ĉ(ε)` from their mean.
    pub fn relative_deviation(&self) -> f64 {
        let mean = self.c_hat.iter().sum::<f64>() / self.c_hat.len() as f64;
        self.c_hat
            .iter()
            .map(|c| ((c - mean) / mean).abs())
            .fold(0.0, f64::max)
    }
}

/// For each `ε`, twin runs on antithetic path pairs are compared with the
/// twin run at `ε = 0` from the same starting pair. The noise-free twin
/// carries all of the deterministic contraction, so the log excess isolates
/// the noise contribution that the bound `exp(Ĉ ε² t)` controls.
pub fn contraction_constant_study(
    base: &SolverConfig,
    epsilons: &[f64],
    delta: f64,
    alpha: f64,
    ensemble_size: usize,
    exec: Execution,
) -> Result<ContractionStudy> {
    if ensemble_size < 2 || ensemble_size % 2 != 0 {
        return Err(Error::invalid("ensemble_size", "need a positive even number of members"));
    }
    let clean = twin_run(&base.with_epsilon(0.0), delta, None)?;
    let clean_log = clean.report(alpha, 0.0, delta).log_weighted_diffs();
    let times = clean.times.clone();
    let members: Vec<u64> = (0..ensemble_size as u64).collect();
    let mut mean_log_excess = Vec::new();
    let mut c_hat = Vec::new();
    let mut reports = Vec::new();
    for &eps in epsilons {
        let config = base.with_epsilon(eps);
        let runs = map_members(exec, &members, |m| {
            let path = antithetic_path(&config, m)?;
            let twins = twin_run(&config, delta, Some(&path))?;
            Ok(twins.report(alpha, eps, delta))
        })?;
        let mut mean = vec![0.0; times.len()];
        for r in &runs {
            for ((m, lw), c) in mean.iter_mut().zip(r.log_weighted_diffs()).zip(&clean_log) {
                *m += (lw - c) / runs.len() as f64;
            }
        }
        let eps2 = eps * eps;
        let c = mean
            .iter()
            .zip(&times)
            .skip(1)
            .map(|(m, &t)| m / (eps2 * t))
            .fold(f64::NEG_INFINITY, f64::max);
        mean_log_excess.push(mean);
        c_hat.push(c);
        reports.push(runs.into_iter().next().expect("non-empty ensemble"));
    }
    Ok(ContractionStudy {
        alpha,
        delta,
        ensemble_size,
        epsilons: epsilons.to_vec(),
        times,
        mean_log_excess,
        c_hat,
        reports,
    })
}
