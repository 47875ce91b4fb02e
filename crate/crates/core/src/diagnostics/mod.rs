//! Energy estimates, transport energy balance, contraction of twin runs
//! and the vanishing-noise convergence study.

mod budget;
mod contraction;
mod convergence;
mod estimates;
mod fit;
mod transport;

pub use budget::{energy_budget_transport, TransportBudget};
pub use contraction::{
    alpha_sweep, contraction_constant_study, contraction_test, perturbed, twin_run,
    ContractionReport, ContractionStudy, TwinRun, ALPHA_SWEEP,
};
pub use convergence::{epsilon_convergence_study, ConvergenceReport};
pub use estimates::{
    antithetic_path, energy_estimate_check, energy_scaling_study, run_antithetic_ensemble,
    EnergyEstimateReport, EnergyScalingReport, MIN_ENSEMBLE,
};
pub use fit::{least_squares, loglog_fit, rms, LinearFit, MeanEstimate};
pub use transport::{transport_drift_study, TransportDriftReport};
