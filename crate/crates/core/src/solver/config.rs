use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::noise::{build_noise_model, NoiseModel};
use crate::operators::OperatorContext;
use crate::spectral::TorusGrid;

/// Time discretization. Only one scheme exists: Euler–Maruyama on the
/// explicit terms with the Stokes operator integrated exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    #[default]
    EulerMaruyamaSemiImplicit,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::EulerMaruyamaSemiImplicit => "euler_maruyama_semi_implicit",
        }
    }

    /// Whether the Stokes term is handled by an integrating factor, which
    /// lifts the viscous step-size limit.
    pub fn integrating_factor(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    /// `u₀ = (cos x sin y, -sin x cos y)`.
    TaylorGreen,
    /// Random phases on the shell `k_min ≤ |k| ≤ k_max`, projected and
    /// normalized to `½|v|²_H = energy`.
    RandomBand {
        k_min: f64,
        k_max: f64,
        energy: f64,
        seed: u64,
    },
    /// Snapshot file.
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub k_modes: usize,
    pub spectrum_exponent: f64,
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub n_modes: usize,
    pub noise: NoiseSpec,
    pub epsilon: f64,
    pub reynolds: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub record_every: usize,
    pub initial_condition: InitialCondition,
    /// Keep full velocity snapshots at record times.
    pub keep_snapshots: bool,
}

impl SolverConfig {
    /// Reference configuration: N = 32, Re = 100, ε = 0.1, dt = 1e-3, T = 1,
    /// K = 4 modes with r = 3 and unit amplitude, Taylor–Green start.
    pub fn reference() -> Self {
        Self {
            n_modes: 32,
            noise: NoiseSpec {
                k_modes: 4,
                spectrum_exponent: 3.0,
                amplitude: 1.0,
                seed: 7,
            },
            epsilon: 0.1,
            reynolds: 100.0,
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::EulerMaruyamaSemiImplicit,
            record_every: 10,
            initial_condition: InitialCondition::TaylorGreen,
            keep_snapshots: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 8 || self.n_modes % 2 != 0 {
            return Err(Error::invalid("N", "must be even and at least 8"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(Error::invalid("T", "must be at least dt"));
        }
        if !(self.reynolds.is_finite() && self.reynolds > 0.0) {
            return Err(Error::invalid("Re", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::invalid("eps", "must lie in [0, 1]"));
        }
        if self.noise.k_modes == 0 {
            return Err(Error::invalid("noise.K", "must be at least 1"));
        }
        if !(self.noise.amplitude.is_finite() && self.noise.amplitude >= 0.0) {
            return Err(Error::invalid("noise.amp", "must be finite and non-negative"));
        }
        if !self.noise.spectrum_exponent.is_finite() {
            return Err(Error::invalid("noise.r", "must be finite"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every", "must be at least 1"));
        }
        if !self.scheme.integrating_factor() && self.dt > self.viscous_dt_limit() {
            return Err(Error::invalid(
                "dt",
                format!("exceeds the viscous limit {:e}", self.viscous_dt_limit()),
            ));
        }
        if let InitialCondition::RandomBand {
            k_min,
            k_max,
            energy,
            ..
        } = &self.initial_condition
        {
            if !(*k_min >= 1.0 && k_max >= k_min) {
                return Err(Error::invalid("initial_condition", "need 1 ≤ k_min ≤ k_max"));
            }
            if !(energy.is_finite() && *energy >= 0.0) {
                return Err(Error::invalid("initial_condition", "energy must be non-negative"));
            }
        }
        Ok(())
    }

    /// `0.5 Re / (N/2)²`, binding only for explicit viscous treatment.
    pub fn viscous_dt_limit(&self) -> f64 {
        let half = (self.n_modes / 2) as f64;
        0.5 * self.reynolds / (half * half)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.n_modes)
    }

    pub fn noise_model(&self, grid: &TorusGrid) -> Result<NoiseModel> {
        build_noise_model(
            grid,
            self.noise.k_modes,
            self.noise.spectrum_exponent,
            self.noise.amplitude,
        )
    }

    /// Validated operator context for this configuration.
    pub fn context(&self) -> Result<OperatorContext> {
        self.validate()?;
        let grid = self.grid()?;
        let noise = self.noise_model(&grid)?;
        OperatorContext::new(Arc::new(noise), self.epsilon, self.reynolds)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_is_valid() {
        let c = SolverConfig::reference();
        c.validate().unwrap();
        assert_eq!(c.n_steps(), 1000);
    }

    #[test]
    fn rejects_bad_fields() {
        let base = SolverConfig::reference();
        let bad = [
            SolverConfig { dt: -1.0, ..base.clone() },
            SolverConfig { t_end: 1e-4, ..base.clone() },
            SolverConfig { n_modes: 30 + 1, ..base.clone() },
            SolverConfig { reynolds: 0.0, ..base.clone() },
            SolverConfig { epsilon: 2.0, ..base.clone() },
            SolverConfig { record_every: 0, ..base.clone() },
        ];
        let fields = ["dt", "T", "N", "Re", "eps", "record_every"];
        for (cfg, field) in bad.iter().zip(fields) {
            match cfg.validate() {
                Err(Error::InvalidParameter { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected error on {field}, got {other:?}"),
            }
        }
    }
}
