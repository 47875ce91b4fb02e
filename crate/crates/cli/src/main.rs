use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};

use lu_flow_cli::{
    apply_seed_override, cmd_converge, cmd_ensemble, cmd_simulate, cmd_transport, cmd_validate,
    parse_config, CliError, ConfigError, Invocation, SeedSource, SEED_ENV,
};

/// Stochastic Navier–Stokes under location uncertainty on the 2D torus.
///
/// The environment variable LU_FLOW_SEED overrides `noise.seed`; the
/// override is recorded in the run manifest.
#[derive(Parser, Debug)]
#[command(name = "lu-flow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for ensemble fan-out; 1 runs members sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// One trajectory (member 0).
    Simulate,
    /// `study.members` trajectories with per-member and aggregate CSV.
    Ensemble,
    /// Vanishing-noise study over `study.epsilons`.
    Converge,
    /// Stochastic scalar transport: energy budget and drift.
    Transport,
    /// Invariant suite; exits with status 3 on any failure.
    Validate,
}

fn load(cli: &Cli) -> Result<Invocation, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| ConfigError::Invalid {
        field: "--config".into(),
        reason: "a configuration file is required".into(),
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Invalid {
        field: "--config".into(),
        reason: format!("cannot read {}: {e}", path.display()),
    })?;
    let mut config = parse_config(&text)?;
    let env = std::env::var(SEED_ENV).ok();
    let seed_source = apply_seed_override(&mut config, env.as_deref())?;
    if seed_source == SeedSource::Environment {
        info!("{SEED_ENV} overrides the seed: {}", config.noise.seed);
    }
    if cli.jobs == Some(0) {
        return Err(ConfigError::Invalid {
            field: "--jobs".into(),
            reason: "must be at least 1".into(),
        }
        .into());
    }
    Ok(Invocation {
        config,
        seed_source,
        jobs: cli.jobs,
        out: cli.out.clone(),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = load(&cli).and_then(|inv| match cli.command {
        Command::Simulate => cmd_simulate(&inv),
        Command::Ensemble => cmd_ensemble(&inv),
        Command::Converge => cmd_converge(&inv),
        Command::Transport => cmd_transport(&inv),
        Command::Validate => cmd_validate(&inv),
    });
    match result {
        Ok(summary) => {
            for (k, v) in summary {
                println!("{k} = {v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
