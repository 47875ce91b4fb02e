use log::warn;

use super::config::SolverConfig;
use super::initial::make_initial;
use super::step::Stepper;
use crate::error::{Error, Result};
use crate::noise::WienerPath;
use crate::operators::{change_of_variable, OperatorContext};
use crate::spectral::SpectralVelocity;

/// Scalar diagnostics of one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// `½ |v|²_H`
    pub energy: f64,
    /// `½ ‖v‖²_V`
    pub enstrophy: f64,
    pub max_divergence: f64,
    pub h_norm: f64,
    pub v_norm: f64,
}

impl Diagnostics {
    pub fn of(v: &SpectralVelocity) -> Self {
        let h_norm = v.h_norm();
        let v_norm = v.v_norm();
        Self {
            energy: 0.5 * h_norm * h_norm,
            enstrophy: 0.5 * v_norm * v_norm,
            max_divergence: v.max_divergence(),
            h_norm,
            v_norm,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.energy, self.enstrophy, self.max_divergence, self.h_norm, self.v_norm]
            .iter()
            .all(|x| x.is_finite())
    }
}

/// Time series emitted by a run.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub diagnostics: Vec<Diagnostics>,
    pub snapshots: Option<Vec<SpectralVelocity>>,
    pub final_state: SpectralVelocity,
}

impl TrajectoryRecord {
    pub fn energies(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.energy).collect()
    }

    pub fn sup_energy(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.energy).fold(0.0, f64::max)
    }

    /// `∫₀ᵀ ‖v‖²_V dt` by the trapezoid rule over the recorded times.
    pub fn integrated_v_norm_sq(&self) -> f64 {
        trapezoid(&self.times, &self.diagnostics.iter().map(|d| d.v_norm * d.v_norm).collect::<Vec<_>>())
    }
}

/// Trapezoid rule for samples `y` at increasing `t`.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Observer called with `(step, time, state)` at recorded steps.
pub trait Observer {
    fn observe(&mut self, step: usize, time: f64, state: &SpectralVelocity) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(usize, f64, &SpectralVelocity) -> Result<()>,
{
    fn observe(&mut self, step: usize, time: f64, state: &SpectralVelocity) -> Result<()> {
        self(step, time, state)
    }
}

/// Integrates `n_steps` steps from `v0`, calling `observer` at step 0, every
/// `record_every` steps and at the final step. Returns the final state.
pub fn integrate(
    stepper: &Stepper,
    v0: &SpectralVelocity,
    n_steps: usize,
    path: Option<&WienerPath>,
    record_every: usize,
    observer: &mut dyn Observer,
) -> Result<SpectralVelocity> {
    if let Some(p) = path {
        let k = stepper.context().noise().k_modes();
        if p.n_modes() != k {
            return Err(Error::IncrementLength {
                expected: k,
                found: p.n_modes(),
            });
        }
        if p.n_steps() < n_steps {
            return Err(Error::StepOutOfRange {
                step: n_steps - 1,
                n_steps: p.n_steps(),
            });
        }
        if (p.dt() - stepper.dt()).abs() > 1e-12 * stepper.dt() {
            return Err(Error::invalid("dt", "path step differs from solver step"));
        }
    }
    let dt = stepper.dt();
    let record_every = record_every.max(1);
    check_cfl(stepper, v0);
    observer.observe(0, 0.0, v0)?;
    let mut v = v0.clone();
    for s in 0..n_steps {
        let d_beta = match path {
            Some(p) => Some(p.sample_increments(s)?),
            None => None,
        };
        v = stepper.advance(&v, d_beta)?;
        let done = s + 1;
        let time = done as f64 * dt;
        if !v.is_finite() {
            return Err(Error::BlowUp { step: done, time });
        }
        if done % record_every == 0 || done == n_steps {
            observer.observe(done, time, &v)?;
        }
    }
    Ok(v)
}

fn check_cfl(stepper: &Stepper, v: &SpectralVelocity) {
    let [a, b] = v.physical();
    let umax = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| x.hypot(*y))
        .fold(0.0, f64::max);
    let h = stepper.context().grid().spacing();
    if umax > 0.0 && stepper.dt() > 0.5 * h / umax {
        warn!(
            "dt = {:e} exceeds the advective CFL bound {:e}",
            stepper.dt(),
            0.5 * h / umax
        );
    }
}

struct Recorder {
    times: Vec<f64>,
    diagnostics: Vec<Diagnostics>,
    snapshots: Option<Vec<SpectralVelocity>>,
}

impl Recorder {
    fn new(keep_snapshots: bool) -> Self {
        Self {
            times: Vec::new(),
            diagnostics: Vec::new(),
            snapshots: keep_snapshots.then(Vec::new),
        }
    }

    fn finish(self, final_state: SpectralVelocity) -> TrajectoryRecord {
        TrajectoryRecord {
            times: self.times,
            diagnostics: self.diagnostics,
            snapshots: self.snapshots,
            final_state,
        }
    }
}

impl Observer for Recorder {
    fn observe(&mut self, step: usize, time: f64, state: &SpectralVelocity) -> Result<()> {
        let d = Diagnostics::of(state);
        if !d.is_finite() {
            return Err(Error::BlowUp { step, time });
        }
        self.times.push(time);
        self.diagnostics.push(d);
        if let Some(s) = self.snapshots.as_mut() {
            s.push(state.clone());
        }
        Ok(())
    }
}

/// Initial state `v₀ = u₀ - ε² P u_s` for the configured initial condition.
pub fn initial_state(config: &SolverConfig, ctx: &OperatorContext) -> Result<SpectralVelocity> {
    let u0 = make_initial(&config.initial_condition, ctx.grid())?;
    Ok(change_of_variable(&u0, ctx))
}

/// Path of `member` for `config`, or `None` when the noise is inactive.
pub fn member_path(
    config: &SolverConfig,
    ctx: &OperatorContext,
    member: u64,
) -> Result<Option<WienerPath>> {
    if !ctx.noise_active() {
        return Ok(None);
    }
    WienerPath::for_member(
        config.noise.seed,
        member,
        config.dt,
        config.n_steps(),
        ctx.noise().k_modes(),
    )
    .map(Some)
}

/// Runs `config` along an explicit path (or none) from `v0`, recording
/// diagnostics every `record_every` steps.
pub fn run_with_path(
    config: &SolverConfig,
    ctx: &OperatorContext,
    v0: &SpectralVelocity,
    path: Option<&WienerPath>,
) -> Result<TrajectoryRecord> {
    let stepper = Stepper::new(ctx.clone(), config.dt)?;
    let mut recorder = Recorder::new(config.keep_snapshots);
    let path = path.filter(|_| ctx.noise_active());
    let last = integrate(
        &stepper,
        v0,
        config.n_steps(),
        path,
        config.record_every,
        &mut recorder,
    )?;
    Ok(recorder.finish(last))
}

/// Ensemble member `member` of `config`; its path is drawn from
/// `(noise.seed, member)`.
pub fn run(config: &SolverConfig, member: u64) -> Result<TrajectoryRecord> {
    let ctx = config.context()?;
    let v0 = initial_state(config, &ctx)?;
    let path = member_path(config, &ctx, member)?;
    run_with_path(config, &ctx, &v0, path.as_ref())
}

/// `dv + Av dt + B(v) dt = 0` with the same stepper; no path is consumed.
pub fn run_deterministic(config: &SolverConfig) -> Result<TrajectoryRecord> {
    let config = config.with_epsilon(0.0);
    let ctx = config.context()?;
    let v0 = initial_state(&config, &ctx)?;
    run_with_path(&config, &ctx, &v0, None)
}
