mod common;

use std::f64::consts::PI;

use lu_flow::diagnostics::{
    contraction_test, energy_budget_transport, energy_estimate_check, epsilon_convergence_study,
    least_squares, loglog_fit, run_antithetic_ensemble, twin_run, MeanEstimate, MIN_ENSEMBLE,
};
use lu_flow::ensemble::Execution;
use lu_flow::noise::build_noise_model;
use lu_flow::solver::{random_scalar, run_deterministic, InitialCondition, SolverConfig};
use lu_flow::spectral::{SpectralScalar, TorusGrid};
use lu_flow::Error;

use common::mixed_model;

fn small() -> SolverConfig {
    let mut c = SolverConfig::reference();
    c.n_modes = 16;
    c.t_end = 0.1;
    c.dt = 2e-3;
    c.record_every = 5;
    c.initial_condition = InitialCondition::RandomBand {
        k_min: 1.0,
        k_max: 5.0,
        energy: 1.0,
        seed: 3,
    };
    c
}

#[test]
fn budget_closed_form_for_constant_variance() {
    // a = e₁e₁ᵀ / (2π²): intake (ε²/2) c Σ k₁² |q̂|² area, loss its negative.
    let g = TorusGrid::new(16).unwrap();
    let model = build_noise_model(&g, 2, 3.0, 1.0).unwrap();
    let q = SpectralScalar::from_fn(&g, |x, y| (2.0 * x).cos() + (x + y).sin());
    let eps = 0.4;
    let c = 1.0 / (2.0 * PI * PI);
    let expected = 0.5 * eps * eps * c * (4.0 * 2.0 * PI * PI + 2.0 * PI * PI);
    let b = energy_budget_transport(&q, &model, eps);
    assert!((b.noise_intake - expected).abs() < 1e-13 * expected);
    assert!((b.diffusion_loss + expected).abs() < 1e-13 * expected);
    assert!(b.relative_residual() < 1e-13);
}

#[test]
fn budget_vanishes_on_constants() {
    let g = TorusGrid::new(16).unwrap();
    let model = mixed_model(&g, 1.0);
    let q = SpectralScalar::from_fn(&g, |_, _| 3.0);
    let b = energy_budget_transport(&q, &model, 0.5);
    assert!(b.noise_intake.abs() < 1e-14 && b.diffusion_loss.abs() < 1e-14);
    let q = random_scalar(&g, 7.0, 2);
    assert!(energy_budget_transport(&q, &model, 0.0).noise_intake == 0.0);
}

#[test]
fn fits_recover_exact_lines() {
    let x = [1.0, 2.0, 3.0, 4.0];
    let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
    let fit = least_squares(&x, &y).unwrap();
    assert!((fit.slope - 2.5).abs() < 1e-14 && (fit.intercept + 1.0).abs() < 1e-14);
    let p: Vec<f64> = x.iter().map(|v| 3.0 * v * v).collect();
    assert!((loglog_fit(&x, &p).unwrap().slope - 2.0).abs() < 1e-14);
    assert!(loglog_fit(&x, &[1.0, 0.0, 1.0, 1.0]).is_err());
    let m = MeanEstimate::of(&[1.0, 2.0, 3.0]);
    assert_eq!(m.mean, 2.0);
    assert!((m.std_error - 1.0 / 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn noise_free_ensemble_reproduces_deterministic_moments() {
    let cfg = small().with_epsilon(0.0);
    let det = run_deterministic(&cfg).unwrap();
    let ensemble = vec![det.clone(); MIN_ENSEMBLE];
    let r = energy_estimate_check(&ensemble, &det, 0.0, cfg.reynolds, 2).unwrap();
    assert!((r.sup_ratio() - 1.0).abs() < 1e-14);
    assert!((r.integrated_ratio() - 1.0).abs() < 1e-14);
    assert!(r.within_growth());
}

#[test]
fn higher_moments_dominate_by_jensen() {
    let cfg = small().with_epsilon(0.5);
    let ensemble = run_antithetic_ensemble(&cfg, MIN_ENSEMBLE, Execution::default()).unwrap();
    let det = run_deterministic(&cfg).unwrap();
    let m2 = energy_estimate_check(&ensemble, &det, 0.5, cfg.reynolds, 2).unwrap();
    let m4 = energy_estimate_check(&ensemble, &det, 0.5, cfg.reynolds, 4).unwrap();
    assert!(m4.sup_moment.mean >= m2.sup_moment.mean.powi(2));
    assert!(m2.is_finite() && m2.gronwall_holds(1e-12));
}

#[test]
fn small_ensembles_and_odd_moments_are_rejected() {
    let cfg = small().with_epsilon(0.0);
    let det = run_deterministic(&cfg).unwrap();
    let few = vec![det.clone(); 10];
    assert!(matches!(
        energy_estimate_check(&few, &det, 0.0, cfg.reynolds, 2),
        Err(Error::InsufficientEnsemble { found: 10, .. })
    ));
    let enough = vec![det.clone(); MIN_ENSEMBLE];
    assert!(energy_estimate_check(&enough, &det, 0.0, cfg.reynolds, 3).is_err());
}

#[test]
fn identical_twins_never_separate() {
    let cfg = small();
    let twins = twin_run(&cfg, 0.0, None).unwrap();
    assert!(twins.diffs.iter().all(|d| *d == 0.0));
    let r = contraction_test(&cfg, 0.0, 1, cfg.reynolds).unwrap();
    assert!(r.bounded_by(0.0, 0.0));
}

#[test]
fn noise_free_weighted_difference_contracts() {
    let cfg = small().with_epsilon(0.0);
    let r = contraction_test(&cfg, 1e-3, 0, 10.0 * cfg.reynolds).unwrap();
    assert!(r.non_increasing(1e-12));
}

#[test]
fn silent_noise_gives_zero_errors() {
    let mut cfg = small();
    cfg.noise.amplitude = 0.0;
    let r = epsilon_convergence_study(&cfg, &[0.2, 0.1], 4, true, Execution::default()).unwrap();
    assert!(r.h_errors.iter().all(|e| *e == 0.0));
    assert!(r.fitted_slope.is_nan());
}

#[test]
fn shared_paths_give_a_cleaner_line() {
    let cfg = small();
    let eps = [0.2, 0.1, 0.05];
    let shared = epsilon_convergence_study(&cfg, &eps, 8, true, Execution::default()).unwrap();
    let indep = epsilon_convergence_study(&cfg, &eps, 8, false, Execution::default()).unwrap();
    assert!(shared.strictly_decreasing());
    assert!(shared.memberwise_monotone());
    assert!((shared.fitted_slope - 1.0).abs() < 0.1, "slope {}", shared.fitted_slope);
    assert!(
        shared.fit_residual() <= indep.fit_residual(),
        "shared {} vs independent {}",
        shared.fit_residual(),
        indep.fit_residual()
    );
}

#[test]
fn convergence_rejects_bad_grids_of_epsilon() {
    let cfg = small();
    assert!(epsilon_convergence_study(&cfg, &[0.1], 4, true, Execution::default()).is_err());
    assert!(epsilon_convergence_study(&cfg, &[0.1, 0.2], 4, true, Execution::default()).is_err());
    assert!(epsilon_convergence_study(&cfg, &[0.2, 0.1], 0, true, Execution::default()).is_err());
}
