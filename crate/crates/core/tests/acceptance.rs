//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use lu_flow::diagnostics::{
    contraction_constant_study, energy_budget_transport, energy_scaling_study,
    epsilon_convergence_study, loglog_fit, transport_drift_study, twin_run,
};
use lu_flow::ensemble::Execution;
use lu_flow::noise::{build_noise_model, check_regularity, NoiseModel, WienerPath};
use lu_flow::operators::{apply_a, apply_b, apply_f, apply_g_column, trilinear, OperatorContext};
use lu_flow::solver::{random_band, random_scalar, run_deterministic, taylor_green, SolverConfig};
use lu_flow::spectral::{leray_project, SpectralVelocity, TorusGrid};

use common::mixed_model;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn reference() -> SolverConfig {
    SolverConfig::reference()
}

fn operator_identities() -> Outcome {
    let cfg = reference();
    let ctx = cfg.context().unwrap();
    let grid = ctx.grid().clone();
    let re = cfg.reynolds;
    let mut worst = [0.0f64; 5];
    for s in 0..100u64 {
        let u = random_band(&grid, 1.0, 15.0, 1.0, s);
        let v = random_band(&grid, 1.0, 15.0, 1.0, 1000 + s);
        let w = random_band(&grid, 1.0, 15.0, 1.0, 2000 + s);

        let lhs = apply_a(&ctx, &v).inner(&v);
        let rhs = v.v_norm().powi(2) / re;
        worst[0] = worst[0].max((lhs - rhs).abs() / rhs);

        let buv = apply_b(&u, &v).unwrap();
        worst[1] = worst[1].max(buv.inner(&v).abs() / (buv.h_norm() * v.h_norm()));

        let b1 = trilinear(&u, &v, &w).unwrap();
        let b2 = trilinear(&u, &w, &v).unwrap();
        let scale = buv.h_norm() * w.h_norm();
        worst[2] = worst[2].max((b1 + b2).abs() / scale);

        let f = SpectralVelocity::from_components(
            random_scalar(&grid, 15.0, 3000 + s),
            random_scalar(&grid, 15.0, 4000 + s),
        )
        .unwrap();
        let g = SpectralVelocity::from_components(
            random_scalar(&grid, 15.0, 5000 + s),
            random_scalar(&grid, 15.0, 6000 + s),
        )
        .unwrap();
        let pf = leray_project(&f);
        worst[3] = worst[3].max(leray_project(&pf).max_abs_diff(&pf) / pf.max_abs_coeff());
        let sym = (pf.inner(&g) - f.inner(&leray_project(&g))).abs();
        worst[4] = worst[4].max(sym / (f.h_norm() * g.h_norm()));
    }
    outcome(
        worst.iter().all(|e| *e <= 1e-10),
        format!(
            "A {:.1e}, B skew {:.1e}, b antisym {:.1e}, P idem {:.1e}, P adj {:.1e} (100 fields)",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn transport_neutrality() -> Outcome {
    let cfg = reference();
    let grid = cfg.grid().unwrap();
    let models: [NoiseModel; 2] = [
        build_noise_model(&grid, 4, 3.0, 1.0).unwrap(),
        mixed_model(&grid, 1.0),
    ];
    let mut worst: f64 = 0.0;
    for model in &models {
        for s in 0..10 {
            let q = random_scalar(&grid, 12.0, s);
            let b = energy_budget_transport(&q, model, cfg.epsilon);
            assert!(b.noise_intake > 0.0);
            worst = worst.max(b.relative_residual());
        }
    }
    let drift = transport_drift_study(&cfg, 64, Execution::default()).unwrap();
    let ratio = drift.ratio();
    outcome(
        worst <= 1e-9 && (1.6..=2.4).contains(&ratio),
        format!(
            "budget residual {worst:.1e}; drift {:.3e} at dt, {:.3e} at dt/2, ratio {ratio:.3} (64 members)",
            drift.coarse.mean, drift.fine.mean
        ),
    )
}

fn deterministic_oracle() -> Outcome {
    let cfg = reference();
    let record = run_deterministic(&cfg).unwrap();
    let grid = cfg.grid().unwrap();
    let t = *record.times.last().unwrap();
    let exact = taylor_green(&grid).scaled((-2.0 * t / cfg.reynolds).exp());
    let err = (&record.final_state - &exact).h_norm() / exact.h_norm();
    outcome(err <= 1e-6, format!("terminal relative L2 error {err:.2e} at T = {t}"))
}

fn vanishing_noise() -> Outcome {
    let cfg = reference();
    let eps = [0.2, 0.1, 0.05, 0.025];
    let report = epsilon_convergence_study(&cfg, &eps, 64, true, Execution::default()).unwrap();
    outcome(
        report.fitted_slope >= 0.8 && report.strictly_decreasing(),
        format!(
            "RMS sup H errors {}, slope {:.4} (64 members, shared paths)",
            sci(&report.h_errors),
            report.fitted_slope
        ),
    )
}

fn contraction() -> Outcome {
    let cfg = reference();
    let ctx = cfg.context().unwrap();
    let path = WienerPath::for_member(cfg.noise.seed, 0, cfg.dt, cfg.n_steps(), ctx.noise().k_modes()).unwrap();
    let same = twin_run(&cfg, 0.0, Some(&path)).unwrap();
    let bitwise = same.diffs.iter().all(|d| *d == 0.0)
        && same.final_states[0].max_abs_diff(&same.final_states[1]) == 0.0;

    let study = contraction_constant_study(
        &cfg,
        &[0.05, 0.1, 0.2],
        1e-3,
        cfg.reynolds,
        16,
        Execution::default(),
    )
    .unwrap();
    let bounded = study
        .reports
        .iter()
        .zip(&study.c_hat)
        .all(|(r, c)| r.bounded_by(*c, 1e-12));
    let dev = study.relative_deviation();
    let finite = study.c_hat.iter().all(|c| c.is_finite());
    outcome(
        bitwise && bounded && finite && dev <= 0.3,
        format!(
            "delta 0 bitwise {bitwise}; C_hat {:.4?} over eps [0.05, 0.1, 0.2], max deviation {:.2}%, alpha = Re (16 members)",
            study.c_hat,
            100.0 * dev
        ),
    )
}

fn energy_estimates() -> Outcome {
    let cfg = reference();
    let eps = [0.1, 0.2, 0.4];
    let report = energy_scaling_study(&cfg, &eps, 32, Execution::default()).unwrap();
    let slope_ok = (report.slope - 2.0).abs() <= 0.3;
    let resolved = report.excess.iter().all(|e| e.mean.abs() > 5.0 * e.std_error);
    let checks_ok = report.checks.iter().all(|c| {
        c.is_finite() && c.within_growth() && c.gronwall_holds(1e-12) && c.c_spread() <= 0.3
    });
    let cs: Vec<f64> = report.checks.iter().map(|c| c.fitted_c).collect();
    outcome(
        slope_ok && resolved && checks_ok,
        format!(
            "excess {}, slope {:.4}; fitted C {:.4?} (32 members)",
            sci(&report.excess.iter().map(|e| e.mean).collect::<Vec<_>>()),
            report.slope,
            cs
        ),
    )
}

fn noise_regularity() -> Outcome {
    let grid = TorusGrid::new(32).unwrap();
    let smooth = check_regularity(&build_noise_model(&grid, 4, 3.0, 1.0).unwrap());
    let rough = check_regularity(&build_noise_model(&grid, 4, 1.0, 1.0).unwrap());
    let base = mixed_model(&grid, 1.0);
    let c = 3.0;
    let scaled = mixed_model(&grid, c);
    let us = base.ito_stokes_drift();
    let err = scaled.ito_stokes_drift().max_abs_diff(&us.scaled(c * c)) / (c * c * us.max_abs_coeff());
    outcome(
        smooth.passed && !rough.passed && us.max_abs_coeff() > 0.0 && err <= 1e-12,
        format!(
            "tail ratio r=3 {:.3}, r=1 {:.3}; u_s scaling error {err:.1e}",
            smooth.tail_ratio, rough.tail_ratio
        ),
    )
}

fn slope_in_epsilon(ctx: &OperatorContext, eps: &[f64], f: impl Fn(&OperatorContext) -> f64) -> f64 {
    let values: Vec<f64> = eps.iter().map(|&e| f(&ctx.with_epsilon(e).unwrap())).collect();
    loglog_fit(eps, &values).unwrap().slope
}

fn operator_scaling() -> Outcome {
    let grid = TorusGrid::new(32).unwrap();
    let v = random_band(&grid, 1.0, 8.0, 1.0, 17);
    let eps = [0.4, 0.2, 0.1, 0.05];
    let models = [
        build_noise_model(&grid, 4, 3.0, 1.0).unwrap(),
        mixed_model(&grid, 1.0),
    ];
    let mut f_min = f64::INFINITY;
    let mut g_min = f64::INFINITY;
    for model in models {
        let ctx = OperatorContext::new(Arc::new(model), 0.1, 100.0).unwrap();
        f_min = f_min.min(slope_in_epsilon(&ctx, &eps, |c| apply_f(c, &v).unwrap().h_norm()));
        for k in 0..ctx.noise().k_modes() {
            g_min = g_min.min(slope_in_epsilon(&ctx, &eps, |c| {
                apply_g_column(c, &v, k).unwrap().h_norm()
            }));
        }
    }
    outcome(
        f_min >= 1.95 && g_min >= 0.95,
        format!("F slope {f_min:.4}, G column slope {g_min:.4} (min over models and columns)"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 8] = [
        ("operator identities", operator_identities, 10),
        ("transport energy neutrality", transport_neutrality, 300),
        ("deterministic Taylor-Green oracle", deterministic_oracle, 30),
        ("vanishing-noise convergence", vanishing_noise, 1200),
        ("pathwise contraction", contraction, 300),
        ("energy estimates", energy_estimates, 600),
        ("noise regularity", noise_regularity, 5),
        ("operator scaling in eps", operator_scaling, 10),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let in_budget = elapsed <= Duration::from_secs(*budget);
        let (passed, detail) = match result {
            Ok(o) => (o.passed && in_budget, o.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {} {:<34} {} [{:.1}s / {}s] {}",
            i + 1,
            name,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget,
            detail
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
