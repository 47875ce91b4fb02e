use crate::ensemble::{map_members, Execution};
use crate::error::{Error, Result};
use crate::noise::WienerPath;
use crate::solver::{initial_state, run_deterministic, run_with_path, SolverConfig, TrajectoryRecord};

use super::fit::{loglog_fit, MeanEstimate};

/// Smallest ensemble accepted by [`energy_estimate_check`].
pub const MIN_ENSEMBLE: usize = 32;

/// Member `m` drives pair `m / 2`; odd members take the negated path.
pub fn antithetic_path(config: &SolverConfig, member: u64) -> Result<WienerPath> {
    let path = WienerPath::for_member(
        config.noise.seed,
        member / 2,
        config.dt,
        config.n_steps(),
        config.noise.k_modes,
    )?;
    Ok(if member % 2 == 1 { path.negated() } else { path })
}

/// Members `0..size` of `config` on antithetic path pairs.
pub fn run_antithetic_ensemble(
    config: &SolverConfig,
    size: usize,
    exec: Execution,
) -> Result<Vec<TrajectoryRecord>> {
    let ctx = config.context()?;
    let v0 = initial_state(config, &ctx)?;
    let members: Vec<u64> = (0..size as u64).collect();
    map_members(exec, &members, |m| {
        let path = antithetic_path(config, m)?;
        run_with_path(config, &ctx, &v0, Some(&path))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyEstimateReport {
    pub ensemble_size: usize,
    pub p: u32,
    pub epsilon: f64,
    /// `E[sup_t |v|^p_H]`
    pub sup_moment: MeanEstimate,
    /// `E[∫₀ᵀ ‖v‖²_V dt]`
    pub integrated_v: MeanEstimate,
    pub deterministic_sup: f64,
    pub deterministic_integrated: f64,
    pub times: Vec<f64>,
    /// `E[|v(t)|²_H + (2/Re) ∫₀ᵗ ‖v‖²_V]`, the left side of the Gronwall form.
    pub balance: Vec<f64>,
    /// Same quantity along the deterministic run.
    pub deterministic_balance: Vec<f64>,
    /// Constant solving `(|v₀|² + Cε²t) e^{Cε²t} = balance(t)` at each `t > 0`.
    pub c_by_time: Vec<f64>,
    /// One constant for all times: the largest of `c_by_time`. Negative
    /// when the noise drains energy on average.
    pub fitted_c: f64,
}

impl EnergyEstimateReport {
    pub fn sup_ratio(&self) -> f64 {
        self.sup_moment.mean / self.deterministic_sup
    }

    pub fn integrated_ratio(&self) -> f64 {
        self.integrated_v.mean / self.deterministic_integrated
    }

    /// `(max - min) / |max|` of the per-time constants.
    pub fn c_spread(&self) -> f64 {
        let min = self.c_by_time.iter().copied().fold(f64::INFINITY, f64::min);
        (self.fitted_c - min) / self.fitted_c.abs()
    }

    /// `E sup|v|²` and `E∫‖v‖²_V` both within `1 + |C| ε² T` of the
    /// deterministic values.
    pub fn within_growth(&self) -> bool {
        let t = *self.times.last().expect("non-empty record");
        let growth = 1.0 + self.fitted_c.abs() * self.epsilon * self.epsilon * t;
        let ok = |r: f64| r.is_finite() && r <= growth * (1.0 + 1e-12);
        ok(self.sup_ratio()) && ok(self.integrated_ratio())
    }

    pub fn is_finite(&self) -> bool {
        self.sup_moment.mean.is_finite() && self.integrated_v.mean.is_finite()
    }

    /// `(|v₀|² + Cε²t) e^{Cε²t}`.
    pub fn gronwall_bound(&self, c: f64, t: f64) -> f64 {
        let s = c * self.epsilon * self.epsilon * t;
        (self.balance[0] + s) * s.exp()
    }

    /// Every recorded mean balance lies under the Gronwall curve with
    /// `fitted_c`, up to `tol` relative.
    pub fn gronwall_holds(&self, tol: f64) -> bool {
        self.times
            .iter()
            .zip(&self.balance)
            .all(|(&t, &b)| b <= self.gronwall_bound(self.fitted_c, t) * (1.0 + tol))
    }
}

/// Solves `(h0 + s) e^s = target` for `s > -h0`.
fn gronwall_exponent(h0: f64, target: f64) -> f64 {
    let f = |s: f64| (h0 + s) * s.exp() - target;
    let (mut lo, mut hi) = (-h0, 1.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn balance_series(record: &TrajectoryRecord, reynolds: f64) -> Vec<f64> {
    let d = &record.diagnostics;
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(d.len());
    for i in 0..d.len() {
        if i > 0 {
            let dt = record.times[i] - record.times[i - 1];
            integral += 0.5 * dt * (d[i].v_norm.powi(2) + d[i - 1].v_norm.powi(2));
        }
        out.push(d[i].h_norm.powi(2) + 2.0 / reynolds * integral);
    }
    out
}

/// Monte Carlo energy moments of an ensemble sharing one configuration,
/// compared against the deterministic run.
pub fn energy_estimate_check(
    ensemble: &[TrajectoryRecord],
    deterministic: &TrajectoryRecord,
    epsilon: f64,
    reynolds: f64,
    p: u32,
) -> Result<EnergyEstimateReport> {
    if ensemble.len() < MIN_ENSEMBLE {
        return Err(Error::InsufficientEnsemble {
            required: MIN_ENSEMBLE,
            found: ensemble.len(),
        });
    }
    if p < 2 || p % 2 != 0 {
        return Err(Error::invalid("p", "must be an even integer ≥ 2"));
    }
    let times = deterministic.times.clone();
    if ensemble.iter().any(|r| r.times != times) {
        return Err(Error::invalid("ensemble", "records must share the deterministic time grid"));
    }
    let sup_p = |r: &TrajectoryRecord| {
        r.diagnostics
            .iter()
            .map(|d| d.h_norm.powi(p as i32))
            .fold(0.0, f64::max)
    };
    let sups: Vec<f64> = ensemble.iter().map(sup_p).collect();
    let ints: Vec<f64> = ensemble.iter().map(|r| r.integrated_v_norm_sq()).collect();

    let mut balance = vec![0.0; times.len()];
    for r in ensemble {
        for (b, x) in balance.iter_mut().zip(balance_series(r, reynolds)) {
            *b += x / ensemble.len() as f64;
        }
    }
    let h0 = balance[0];
    let eps2 = epsilon * epsilon;
    let c_by_time: Vec<f64> = if eps2 > 0.0 {
        times
            .iter()
            .zip(&balance)
            .skip(1)
            .map(|(&t, &b)| gronwall_exponent(h0, b) / (eps2 * t))
            .collect()
    } else {
        Vec::new()
    };
    let fitted_c = if c_by_time.is_empty() {
        0.0
    } else {
        c_by_time.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };

    Ok(EnergyEstimateReport {
        ensemble_size: ensemble.len(),
        p,
        epsilon,
        sup_moment: MeanEstimate::of(&sups),
        integrated_v: MeanEstimate::of(&ints),
        deterministic_sup: sup_p(deterministic),
        deterministic_integrated: deterministic.integrated_v_norm_sq(),
        deterministic_balance: balance_series(deterministic, reynolds),
        times,
        balance,
        c_by_time,
        fitted_c,
    })
}

/// Terminal excess energy `E[½|v_ε(T)|²] - ½|v(T)|²` across an `ε` sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyScalingReport {
    pub epsilons: Vec<f64>,
    pub excess: Vec<MeanEstimate>,
    /// Log-log slope of `|excess|` in `ε`.
    pub slope: f64,
    pub checks: Vec<EnergyEstimateReport>,
}

pub fn energy_scaling_study(
    base: &SolverConfig,
    epsilons: &[f64],
    ensemble_size: usize,
    exec: Execution,
) -> Result<EnergyScalingReport> {
    let det = run_deterministic(base)?;
    let det_final = det.diagnostics.last().expect("non-empty record").energy;
    let mut excess = Vec::new();
    let mut checks = Vec::new();
    for &eps in epsilons {
        let config = base.with_epsilon(eps);
        let ensemble = run_antithetic_ensemble(&config, ensemble_size, exec)?;
        // Pair averages remove the odd orders in β before taking errors.
        let pairs: Vec<f64> = ensemble
            .chunks(2)
            .map(|c| {
                c.iter()
                    .map(|r| r.diagnostics.last().expect("non-empty record").energy - det_final)
                    .sum::<f64>()
                    / c.len() as f64
            })
            .collect();
        excess.push(MeanEstimate::of(&pairs));
        checks.push(energy_estimate_check(&ensemble, &det, eps, base.reynolds, 2)?);
    }
    let mags: Vec<f64> = excess.iter().map(|e| e.mean.abs()).collect();
    let slope = loglog_fit(epsilons, &mags).map(|f| f.slope).unwrap_or(f64::NAN);
    Ok(EnergyScalingReport {
        epsilons: epsilons.to_vec(),
        excess,
        slope,
        checks,
    })
}
