//! Time integration of the Galerkin system, its deterministic limit and
//! stochastic scalar transport.

mod config;
mod initial;
mod run;
mod step;
mod transport;

pub use config::{InitialCondition, NoiseSpec, Scheme, SolverConfig};
pub use initial::{make_initial, random_band, random_scalar, taylor_green};
pub use run::{
    initial_state, integrate, member_path, run, run_deterministic, run_with_path, trapezoid,
    Diagnostics, Observer, TrajectoryRecord,
};
pub use step::{step, Stepper};
pub use transport::{run_scalar_transport, scalar_increment, AdvectingVelocity, ScalarTrajectory};
