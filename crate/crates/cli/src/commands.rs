use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use log::info;

use lu_flow::diagnostics::{energy_budget_transport, epsilon_convergence_study, transport_drift_study};
use lu_flow::ensemble::{configure_threads, map_members, Execution};
use lu_flow::noise::check_regularity;
use lu_flow::operators::{apply_a, apply_b, trilinear, OperatorContext};
use lu_flow::solver::{
    make_initial, member_path, random_band, random_scalar, run, run_deterministic, scalar_increment,
    taylor_green, SolverConfig,
};
use lu_flow::spectral::{leray_project, snapshot, SpectralVelocity};

use crate::config::{ConfigError, RunConfig, SeedSource};
use crate::manifest::RunManifest;
use crate::output;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    BlowUp(lu_flow::Error),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Other(_) => 1,
            CliError::BlowUp(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

impl From<lu_flow::Error> for CliError {
    fn from(e: lu_flow::Error) -> Self {
        match e {
            lu_flow::Error::BlowUp { .. } => CliError::BlowUp(e),
            lu_flow::Error::InvalidParameter { field, reason } => CliError::Config(ConfigError::Invalid {
                field: field.to_string(),
                reason,
            }),
            other => CliError::Other(other.into()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parsed command-line context shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub config: RunConfig,
    pub seed_source: SeedSource,
    pub jobs: Option<usize>,
    pub out: PathBuf,
}

/// `key = value` lines reported on stdout.
pub type Summary = Vec<(String, String)>;

impl Invocation {
    fn execution(&self) -> Execution {
        match self.jobs {
            Some(1) => Execution::Sequential,
            Some(n) => {
                configure_threads(n);
                Execution::default()
            }
            None => Execution::default(),
        }
    }

    fn solver(&self) -> SolverConfig {
        self.config.solver()
    }

    fn file(&self, stem: &str, ext: &str) -> PathBuf {
        self.out.join(format!("{stem}-{}.{ext}", self.config.short_hash()))
    }

    fn start(&self, command: &str) -> CliResult<RunManifest> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("cannot create {}", self.out.display()))?;
        info!(
            "{command}: config {} seed {} ({:?})",
            self.config.short_hash(),
            self.config.noise.seed,
            self.seed_source
        );
        Ok(RunManifest::new(command, &self.config, self.seed_source, self.jobs))
    }

    fn finish(&self, mut manifest: RunManifest, outputs: &[&Path]) -> CliResult<()> {
        manifest.outputs = outputs
            .iter()
            .map(|p| {
                p.strip_prefix(&self.out)
                    .unwrap_or(p)
                    .display()
                    .to_string()
            })
            .collect();
        manifest.finish();
        manifest.write(&self.out)?;
        Ok(())
    }
}

fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

pub fn cmd_simulate(inv: &Invocation) -> CliResult<Summary> {
    let manifest = inv.start("simulate")?;
    let record = run(&inv.solver(), 0)?;
    let csv = inv.file("trajectory", "csv");
    output::write_trajectory(&csv, &record)?;
    let snap = inv.file("final", "lufs");
    snapshot::save_velocity(&snap, &record.final_state)?;
    let png = inv.file("energy", "png");
    output::plot_lines(&png, &[(&record.times, &record.energies())], false)?;
    inv.finish(manifest, &[&csv, &snap, &png])?;
    let last = record.diagnostics.last().expect("non-empty record");
    Ok(vec![
        kv("steps", inv.solver().n_steps()),
        kv("final_energy", last.energy),
        kv("final_enstrophy", last.enstrophy),
        kv("max_divergence", last.max_divergence),
        kv("trajectory", csv.display()),
    ])
}

pub fn cmd_ensemble(inv: &Invocation) -> CliResult<Summary> {
    let manifest = inv.start("ensemble")?;
    let solver = inv.solver();
    let size = inv.config.study.members;
    let members: Vec<u64> = (0..size as u64).collect();
    let dir = inv.out.join("members");
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let records = map_members(inv.execution(), &members, |m| run(&solver, m))?;
    let mut outputs = Vec::new();
    for (m, record) in records.iter().enumerate() {
        let path = dir.join(format!("member-{m:04}-{}.csv", inv.config.short_hash()));
        output::write_trajectory(&path, record)?;
        outputs.push(path);
    }
    let merged = inv.file("ensemble", "csv");
    output::write_ensemble(&merged, &records)?;
    let aggregate = inv.file("aggregate", "csv");
    output::write_aggregate(&aggregate, &records)?;
    outputs.push(merged.clone());
    outputs.push(aggregate.clone());
    let refs: Vec<&Path> = outputs.iter().map(|p| p.as_path()).collect();
    inv.finish(manifest, &refs)?;
    let mean_final = records
        .iter()
        .map(|r| r.diagnostics.last().expect("non-empty record").energy)
        .sum::<f64>()
        / size as f64;
    Ok(vec![
        kv("members", size),
        kv("mean_final_energy", mean_final),
        kv("aggregate", aggregate.display()),
    ])
}

pub fn cmd_converge(inv: &Invocation) -> CliResult<Summary> {
    let manifest = inv.start("converge")?;
    let study = &inv.config.study;
    let report = epsilon_convergence_study(
        &inv.solver(),
        &study.epsilons,
        study.members,
        study.shared_paths,
        inv.execution(),
    )?;
    let csv = inv.file("convergence", "csv");
    output::write_convergence(&csv, &report)?;
    let png = inv.file("convergence", "png");
    output::plot_lines(
        &png,
        &[(&report.epsilons, &report.h_errors), (&report.epsilons, &report.v_errors)],
        true,
    )?;
    inv.finish(manifest, &[&csv, &png])?;
    Ok(vec![
        kv("fitted_slope", report.fitted_slope),
        kv("v_fitted_slope", report.v_fitted_slope),
        kv("members", report.ensemble_size),
        kv("convergence", csv.display()),
    ])
}

pub fn cmd_transport(inv: &Invocation) -> CliResult<Summary> {
    let manifest = inv.start("transport")?;
    let solver = inv.solver();
    let ctx = solver.context()?;
    let grid = ctx.grid().clone();
    let u = make_initial(&solver.initial_condition, &grid)?;
    let tc = &inv.config.transport;
    let mut q = random_scalar(&grid, tc.k_max, tc.seed);
    let path = member_path(&solver, &ctx, 0)?;
    let mut rows = Vec::new();
    let mut record = |t: f64, q: &lu_flow::spectral::SpectralScalar| {
        let b = energy_budget_transport(q, ctx.noise(), ctx.epsilon());
        rows.push(vec![t, 0.5 * q.l2_norm().powi(2), b.diffusion_loss, b.noise_intake, b.residual]);
    };
    record(0.0, &q);
    let n_steps = solver.n_steps();
    for s in 0..n_steps {
        let d_beta = match &path {
            Some(p) => Some(p.sample_increments(s)?),
            None => None,
        };
        let incr = scalar_increment(&ctx, &q, &u, d_beta, solver.dt)?;
        q.axpy(1.0, &incr);
        q.symmetrize();
        let t = (s + 1) as f64 * solver.dt;
        if !q.is_finite() {
            return Err(lu_flow::Error::BlowUp { step: s + 1, time: t }.into());
        }
        if (s + 1) % solver.record_every == 0 || s + 1 == n_steps {
            record(t, &q);
        }
    }
    let budget = inv.file("transport", "csv");
    output::write_rows(
        &budget,
        &["time", "energy", "diffusion_loss", "noise_intake", "residual"],
        &rows,
    )?;
    let drift = transport_drift_study(&solver, tc.members, inv.execution())?;
    let drift_csv = inv.file("transport-drift", "csv");
    output::write_rows(
        &drift_csv,
        &["dt", "mean_abs_drift", "std_error", "mean_signed_drift"],
        &[
            vec![drift.dt, drift.coarse.mean, drift.coarse.std_error, drift.signed_coarse.mean],
            vec![0.5 * drift.dt, drift.fine.mean, drift.fine.std_error, drift.signed_fine.mean],
        ],
    )?;
    inv.finish(manifest, &[&budget, &drift_csv])?;
    let worst = rows
        .iter()
        .map(|r| if r[3] != 0.0 { (r[4] / r[3]).abs() } else { r[4].abs() })
        .fold(0.0, f64::max);
    Ok(vec![
        kv("max_relative_residual", worst),
        kv("drift_ratio", drift.ratio()),
        kv("members", drift.ensemble_size),
        kv("budget", budget.display()),
    ])
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn operator_checks(ctx: &OperatorContext) -> lu_flow::Result<Check> {
    let grid = ctx.grid();
    let kmax = grid.k_max() as f64;
    let mut worst: f64 = 0.0;
    for s in 0..10 {
        let u = random_band(grid, 1.0, kmax, 1.0, s);
        let v = random_band(grid, 1.0, kmax, 1.0, 100 + s);
        let w = random_band(grid, 1.0, kmax, 1.0, 200 + s);
        let rhs = v.v_norm().powi(2) / ctx.reynolds();
        worst = worst.max((apply_a(ctx, &v).inner(&v) - rhs).abs() / rhs);
        let buv = apply_b(&u, &v)?;
        worst = worst.max(buv.inner(&v).abs() / (buv.h_norm() * v.h_norm()));
        let anti = trilinear(&u, &v, &w)? + trilinear(&u, &w, &v)?;
        worst = worst.max(anti.abs() / (buv.h_norm() * w.h_norm()));
        let f = &u + &SpectralVelocity::from_fn(grid, |x, y| ((x + 2.0 * y).sin(), (3.0 * x).cos()));
        let pf = leray_project(&f);
        worst = worst.max(leray_project(&pf).max_abs_diff(&pf) / pf.max_abs_coeff());
    }
    Ok(Check {
        name: "operator_identities",
        passed: worst <= 1e-10,
        detail: format!("{worst:e}"),
    })
}

pub fn cmd_validate(inv: &Invocation) -> CliResult<Summary> {
    let manifest = inv.start("validate")?;
    let solver = inv.solver();
    let ctx = solver.context()?;
    let grid = ctx.grid().clone();
    let mut checks = vec![operator_checks(&ctx)?];

    let mut tg = solver.with_epsilon(0.0);
    tg.initial_condition = lu_flow::solver::InitialCondition::TaylorGreen;
    let det = run_deterministic(&tg)?;
    let t = *det.times.last().expect("non-empty record");
    let exact = taylor_green(&grid).scaled((-2.0 * t / solver.reynolds).exp());
    let err = (&det.final_state - &exact).h_norm() / exact.h_norm();
    checks.push(Check {
        name: "taylor_green_oracle",
        passed: err <= 1e-6,
        detail: format!("{err:e}"),
    });

    let reg = check_regularity(ctx.noise());
    checks.push(Check {
        name: "noise_regularity",
        passed: reg.passed,
        detail: format!("tail_ratio {}", reg.tail_ratio),
    });

    let mut worst: f64 = 0.0;
    for s in 0..5 {
        let q = random_scalar(&grid, inv.config.transport.k_max, s);
        worst = worst.max(energy_budget_transport(&q, ctx.noise(), 1.0).relative_residual());
    }
    checks.push(Check {
        name: "transport_budget",
        passed: worst <= 1e-9,
        detail: format!("{worst:e}"),
    });

    let short = SolverConfig {
        t_end: (20.0 * solver.dt).min(solver.t_end),
        ..solver.clone()
    };
    let quiet = run(&short.with_epsilon(0.0), 0)?;
    let reference = run_deterministic(&short)?;
    let same = quiet.final_state.max_abs_diff(&reference.final_state) == 0.0;
    checks.push(Check {
        name: "zero_noise_reduction",
        passed: same,
        detail: same.to_string(),
    });

    let noisy = run(&short, 0)?;
    let div = noisy
        .diagnostics
        .iter()
        .map(|d| d.max_divergence / d.h_norm.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "divergence_free",
        passed: div <= 1e-10,
        detail: format!("{div:e}"),
    });

    let path = inv.file("validate", "txt");
    let text: String = checks
        .iter()
        .map(|c| format!("{} = {} ({})\n", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail))
        .collect();
    fs::write(&path, &text).with_context(|| format!("cannot write {}", path.display()))?;
    inv.finish(manifest, &[&path])?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if !failed.is_empty() {
        print!("{text}");
        return Err(CliError::Validation(failed.join(", ")));
    }
    Ok(checks
        .iter()
        .map(|c| kv(c.name, format!("pass ({})", c.detail)))
        .collect())
}
