//! JSON run configuration.
//!
//! ```json
//! {
//!   "N": 32, "Re": 100, "eps": 0.1, "dt": 1e-3, "T": 1,
//!   "noise": { "K": 4, "r": 3, "amp": 1, "seed": 7 }
//! }
//! ```
//!
//! Optional keys and their defaults are listed in the README. Unknown keys
//! are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use lu_flow::solver::{InitialCondition, NoiseSpec, Scheme, SolverConfig};

/// Environment variable overriding `noise.seed`.
pub const SEED_ENV: &str = "LU_FLOW_SEED";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed config at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(rename = "K")]
    pub k_modes: usize,
    pub r: f64,
    pub amp: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    TaylorGreen,
    RandomBand {
        k_min: f64,
        k_max: f64,
        energy: f64,
        seed: u64,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    /// Ensemble size for `ensemble` and `converge`.
    pub members: usize,
    /// Noise amplitudes of `converge`, strictly decreasing.
    pub epsilons: Vec<f64>,
    /// Reuse member `m`'s path at every `ε`.
    pub shared_paths: bool,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            members: 64,
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            shared_paths: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportSection {
    /// Ensemble size of the drift study.
    pub members: usize,
    /// Highest wavenumber of the random initial scalar.
    pub k_max: f64,
    /// Seed of the initial scalar.
    pub seed: u64,
}

impl Default for TransportSection {
    fn default() -> Self {
        Self {
            members: 8,
            k_max: 8.0,
            seed: 1,
        }
    }
}

fn default_record_every() -> usize {
    10
}

fn default_initial() -> InitialSection {
    InitialSection::TaylorGreen
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Re")]
    pub re: f64,
    pub eps: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub noise: NoiseSection,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_initial")]
    pub initial_condition: InitialSection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub transport: TransportSection,
}

impl RunConfig {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            n_modes: self.n,
            noise: NoiseSpec {
                k_modes: self.noise.k_modes,
                spectrum_exponent: self.noise.r,
                amplitude: self.noise.amp,
                seed: self.noise.seed,
            },
            epsilon: self.eps,
            reynolds: self.re,
            dt: self.dt,
            t_end: self.t,
            scheme: Scheme::EulerMaruyamaSemiImplicit,
            record_every: self.record_every,
            initial_condition: match &self.initial_condition {
                InitialSection::TaylorGreen => InitialCondition::TaylorGreen,
                InitialSection::RandomBand {
                    k_min,
                    k_max,
                    energy,
                    seed,
                } => InitialCondition::RandomBand {
                    k_min: *k_min,
                    k_max: *k_max,
                    energy: *energy,
                    seed: *seed,
                },
                InitialSection::File { path } => InitialCondition::File(path.clone()),
            },
            keep_snapshots: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &str, reason: &str| ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.to_string(),
        };
        self.solver().validate().map_err(|e| match e {
            lu_flow::Error::InvalidParameter { field, reason } => ConfigError::Invalid {
                field: field.to_string(),
                reason,
            },
            other => invalid("config", &other.to_string()),
        })?;
        let grid = self.solver().grid().map_err(|e| invalid("N", &e.to_string()))?;
        self.solver()
            .noise_model(&grid)
            .map_err(|e| invalid("noise.K", &e.to_string()))?;
        if self.study.members == 0 {
            return Err(invalid("study.members", "must be at least 1"));
        }
        let eps = &self.study.epsilons;
        if eps.len() < 2 || eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(invalid(
                "study.epsilons",
                "need at least two values in [0, 1], strictly decreasing",
            ));
        }
        if self.transport.members < 2 {
            return Err(invalid("transport.members", "must be at least 2"));
        }
        if !(self.transport.k_max >= 1.0) {
            return Err(invalid("transport.k_max", "must be at least 1"));
        }
        Ok(())
    }

    /// Sorted-key JSON of the config with defaults applied.
    pub fn canonical(&self) -> String {
        // serde_json's map keeps keys sorted, so going through a Value
        // canonicalizes the key order.
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// SHA-256 of [`RunConfig::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn short_hash(&self) -> String {
        self.hash()[..12].to_string()
    }
}

/// Parses and validates a config, with defaults applied.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

/// Where the seed came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Config,
    Environment,
}

/// Applies `LU_FLOW_SEED` when set.
pub fn apply_seed_override(
    config: &mut RunConfig,
    value: Option<&str>,
) -> Result<SeedSource, ConfigError> {
    match value {
        None => Ok(SeedSource::Config),
        Some(raw) => {
            let seed = raw.trim().parse::<u64>().map_err(|_| ConfigError::Invalid {
                field: SEED_ENV.to_string(),
                reason: format!("`{raw}` is not an unsigned integer"),
            })?;
            config.noise.seed = seed;
            Ok(SeedSource::Environment)
        }
    }
}
