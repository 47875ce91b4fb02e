//! Configuration, orchestration and output for the `lu-flow` command.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

pub use commands::{
    cmd_converge, cmd_ensemble, cmd_simulate, cmd_transport, cmd_validate, CliError, Invocation,
    Summary,
};
pub use config::{apply_seed_override, parse_config, ConfigError, RunConfig, SeedSource, SEED_ENV};
pub use manifest::RunManifest;
