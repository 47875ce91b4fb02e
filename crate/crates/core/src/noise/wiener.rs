//! Reproducible Brownian increments.
//!
//! Increments come from ChaCha20 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)` and switched to stream `member` so ensemble members
//! never share a generator. Each uniform draw is
//! `u = ((x >> 11) + ½) · 2⁻⁵³` for a raw 64-bit output `x`, which lies in
//! the open interval (0, 1), and is mapped to a standard normal by the
//! inverse CDF. The table is filled row by row: step-major, mode-minor.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Sample size above which construction runs the moment self-check.
pub const SELF_CHECK_MIN_SAMPLES: usize = 10_000;

/// Table of increments `Δβ_k` for `n_steps` steps of length `dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerPath {
    seed: u64,
    stream: u64,
    dt: f64,
    n_steps: usize,
    n_modes: usize,
    increments: Vec<f64>,
}

fn uniform_open(rng: &mut ChaCha20Rng) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    ((rng.next_u64() >> 11) as f64 + 0.5) * SCALE
}

impl WienerPath {
    pub fn new(seed: u64, dt: f64, n_steps: usize, n_modes: usize) -> Result<Self> {
        Self::for_member(seed, 0, dt, n_steps, n_modes)
    }

    /// Path of ensemble member `member`, drawn from its own ChaCha stream.
    pub fn for_member(
        seed: u64,
        member: u64,
        dt: f64,
        n_steps: usize,
        n_modes: usize,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(member);
        let normal = Normal::standard();
        let sd = dt.sqrt();
        let increments = (0..n_steps * n_modes)
            .map(|_| normal.inverse_cdf(uniform_open(&mut rng)) * sd)
            .collect();
        let path = Self {
            seed,
            stream: member,
            dt,
            n_steps,
            n_modes,
            increments,
        };
        path.self_check()?;
        Ok(path)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Row `step` of the table.
    pub fn sample_increments(&self, step: usize) -> Result<&[f64]> {
        if step >= self.n_steps {
            return Err(Error::StepOutOfRange {
                step,
                n_steps: self.n_steps,
            });
        }
        let k = self.n_modes;
        Ok(&self.increments[step * k..(step + 1) * k])
    }

    /// Same Brownian path on a grid `factor` times coarser: consecutive
    /// increments are summed.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.n_steps % factor != 0 {
            return Err(Error::invalid(
                "factor",
                format!("{factor} does not divide {} steps", self.n_steps),
            ));
        }
        let k = self.n_modes;
        let n_steps = self.n_steps / factor;
        let mut increments = vec![0.0; n_steps * k];
        for (s, row) in increments.chunks_mut(k.max(1)).enumerate().take(n_steps) {
            for f in 0..factor {
                let src = (s * factor + f) * k;
                for (r, x) in row.iter_mut().zip(&self.increments[src..src + k]) {
                    *r += x;
                }
            }
        }
        Ok(Self {
            seed: self.seed,
            stream: self.stream,
            dt: self.dt * factor as f64,
            n_steps,
            n_modes: k,
            increments,
        })
    }

    /// The antithetic path `-β`.
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.increments.iter_mut().for_each(|x| *x = -*x);
        out
    }

    /// Brownian values `β_k(t_n)` at step boundaries, `n_steps + 1` rows.
    pub fn cumulative(&self) -> Vec<Vec<f64>> {
        let k = self.n_modes;
        let mut acc = vec![0.0; k];
        let mut out = vec![acc.clone()];
        for s in 0..self.n_steps {
            for (a, x) in acc.iter_mut().zip(&self.increments[s * k..(s + 1) * k]) {
                *a += x;
            }
            out.push(acc.clone());
        }
        out
    }

    fn self_check(&self) -> Result<()> {
        let m = self.increments.len();
        if m < SELF_CHECK_MIN_SAMPLES {
            return Ok(());
        }
        let mf = m as f64;
        let mean = self.increments.iter().sum::<f64>() / mf;
        let var = self
            .increments
            .iter()
            .map(|x| (x - mean).powi(2))
            .sum::<f64>()
            / (mf - 1.0);
        let mean_se = (self.dt / mf).sqrt();
        let var_se = self.dt * (2.0 / (mf - 1.0)).sqrt();
        if mean.abs() > 5.0 * mean_se {
            return Err(Error::PathSelfCheck(format!(
                "mean {mean:e} exceeds 5 standard errors ({mean_se:e})"
            )));
        }
        if (var - self.dt).abs() > 5.0 * var_se {
            return Err(Error::PathSelfCheck(format!(
                "variance {var:e} deviates from dt = {:e} by more than 5 standard errors",
                self.dt
            )));
        }
        Ok(())
    }
}

/// `sample_increments(path, step)`.
pub fn sample_increments(path: &WienerPath, step: usize) -> Result<&[f64]> {
    path.sample_increments(step)
}
