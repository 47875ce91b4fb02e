use crate::ensemble::{map_members, Execution};
use crate::error::{Error, Result};
use crate::noise::WienerPath;
use crate::solver::{initial_state, integrate, run_deterministic, trapezoid, SolverConfig, Stepper};
use crate::spectral::SpectralVelocity;

use super::fit::{loglog_fit, rms};

/// Vanishing-noise study: errors of `v_ε` against the deterministic solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub epsilons: Vec<f64>,
    /// Ensemble RMS of `sup_t |v_ε - v|_H`.
    pub h_errors: Vec<f64>,
    /// Ensemble RMS of `∫₀ᵀ ‖v_ε - v‖²_V dt`.
    pub v_errors: Vec<f64>,
    /// Per-member `sup_t |v_ε - v|_H`, indexed `[epsilon][member]`.
    pub member_h_errors: Vec<Vec<f64>>,
    /// Log-log slope of `h_errors` against `epsilons`.
    pub fitted_slope: f64,
    pub v_fitted_slope: f64,
    pub ensemble_size: usize,
    pub shared_path: bool,
}

impl ConvergenceReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.h_errors.windows(2).all(|w| w[1] < w[0])
    }

    /// Every member's error is non-increasing as `ε` decreases.
    pub fn memberwise_monotone(&self) -> bool {
        self.member_h_errors.windows(2).all(|w| {
            w[0].iter().zip(&w[1]).all(|(big, small)| small <= big)
        })
    }
}

/// Stream offset separating independent path families from the shared one.
const INDEPENDENT_STREAM: u64 = 1 << 32;

/// Runs `ensemble_size` members at each `ε` against the deterministic
/// reference at the same `N` and `dt`. With `shared_path` every `ε` reuses
/// member `m`'s path; otherwise each `ε` draws its own family.
pub fn epsilon_convergence_study(
    base: &SolverConfig,
    epsilons: &[f64],
    ensemble_size: usize,
    shared_path: bool,
    exec: Execution,
) -> Result<ConvergenceReport> {
    if epsilons.len() < 2 || epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("epsilons", "need at least two, strictly decreasing"));
    }
    if ensemble_size == 0 {
        return Err(Error::InsufficientEnsemble { required: 1, found: 0 });
    }
    let mut reference = base.clone();
    reference.record_every = 1;
    reference.keep_snapshots = true;
    let det = run_deterministic(&reference)?;
    let det_states = det.snapshots.expect("snapshots were requested");
    let times = det.times;

    let members: Vec<u64> = (0..ensemble_size as u64).collect();
    let mut h_errors = Vec::new();
    let mut v_errors = Vec::new();
    let mut member_h_errors = Vec::new();
    for (idx, &eps) in epsilons.iter().enumerate() {
        let config = base.with_epsilon(eps);
        let ctx = config.context()?;
        let v0 = initial_state(&config, &ctx)?;
        let stepper = Stepper::new(ctx.clone(), config.dt)?;
        let n_steps = config.n_steps();
        let per_member = map_members(exec, &members, |m| {
            let stream = if shared_path {
                m
            } else {
                m + INDEPENDENT_STREAM * (idx as u64 + 1)
            };
            let path = WienerPath::for_member(
                config.noise.seed,
                stream,
                config.dt,
                n_steps,
                ctx.noise().k_modes(),
            )?;
            let mut sup: f64 = 0.0;
            let mut v_sq = Vec::with_capacity(n_steps + 1);
            let mut observer = |step: usize, _t: f64, state: &SpectralVelocity| -> Result<()> {
                let diff = state - &det_states[step];
                sup = sup.max(diff.h_norm());
                v_sq.push(diff.v_norm().powi(2));
                Ok(())
            };
            integrate(&stepper, &v0, n_steps, Some(&path), 1, &mut observer)?;
            Ok((sup, trapezoid(&times, &v_sq)))
        })?;
        let sups: Vec<f64> = per_member.iter().map(|p| p.0).collect();
        let ints: Vec<f64> = per_member.iter().map(|p| p.1).collect();
        h_errors.push(rms(&sups));
        v_errors.push(rms(&ints));
        member_h_errors.push(sups);
    }

    let (fitted_slope, v_fitted_slope) = if h_errors.iter().all(|e| *e > 0.0) {
        (
            loglog_fit(epsilons, &h_errors)?.slope,
            loglog_fit(epsilons, &v_errors)?.slope,
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(ConvergenceReport {
        epsilons: epsilons.to_vec(),
        h_errors,
        v_errors,
        member_h_errors,
        fitted_slope,
        v_fitted_slope,
        ensemble_size,
        shared_path,
    })
}

impl ConvergenceReport {
    /// RMS deviation of `log h_errors` from the fitted line.
    pub fn fit_residual(&self) -> f64 {
        let lx: Vec<f64> = self.epsilons.iter().map(|e| e.ln()).collect();
        let ly: Vec<f64> = self.h_errors.iter().map(|e| e.ln()).collect();
        match super::fit::least_squares(&lx, &ly) {
            Ok(fit) => {
                let r: Vec<f64> = lx
                    .iter()
                    .zip(&ly)
                    .map(|(x, y)| y - (fit.slope * x + fit.intercept))
                    .collect();
                rms(&r)
            }
            Err(_) => f64::NAN,
        }
    }
}
