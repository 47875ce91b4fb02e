use crate::ensemble::{map_members, Execution};
use crate::error::{Error, Result};
use crate::noise::WienerPath;
use crate::solver::{make_initial, random_scalar, run_scalar_transport, AdvectingVelocity, SolverConfig};

use super::fit::MeanEstimate;

/// Relative energy drift of stochastic scalar transport at `dt` and `dt/2`
/// on refined paths.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportDriftReport {
    pub dt: f64,
    pub ensemble_size: usize,
    /// `|E_q(T) - E_q(0)| / E_q(0)` at `dt`.
    pub coarse: MeanEstimate,
    /// Same at `dt / 2`.
    pub fine: MeanEstimate,
    pub signed_coarse: MeanEstimate,
    pub signed_fine: MeanEstimate,
}

impl TransportDriftReport {
    /// Mean absolute drift at `dt` over that at `dt/2`; 2 for first order.
    pub fn ratio(&self) -> f64 {
        self.coarse.mean / self.fine.mean
    }
}

/// Transports a random scalar (one per member) by the configured initial
/// velocity held steady, with the noise, `ε`, `dt` and `T` of `config`.
pub fn transport_drift_study(
    config: &SolverConfig,
    ensemble_size: usize,
    exec: Execution,
) -> Result<TransportDriftReport> {
    if ensemble_size < 2 {
        return Err(Error::InsufficientEnsemble {
            required: 2,
            found: ensemble_size,
        });
    }
    let ctx = config.context()?;
    let grid = ctx.grid().clone();
    let u = make_initial(&config.initial_condition, &grid)?;
    let k_max = (grid.n_modes() / 4) as f64;
    let fine_dt = 0.5 * config.dt;
    let fine_steps = 2 * config.n_steps();
    let members: Vec<u64> = (0..ensemble_size as u64).collect();
    let drifts = map_members(exec, &members, |m| {
        let q0 = random_scalar(&grid, k_max, config.noise.seed.wrapping_add(m));
        let fine = WienerPath::for_member(config.noise.seed, m, fine_dt, fine_steps, ctx.noise().k_modes())?;
        let coarse = fine.coarsen(2)?;
        let velocity = AdvectingVelocity::Steady(&u);
        let a = run_scalar_transport(&q0, velocity, &ctx, config.dt, config.t_end, Some(&coarse))?;
        let b = run_scalar_transport(&q0, velocity, &ctx, fine_dt, config.t_end, Some(&fine))?;
        Ok([a.signed_relative_drift(), b.signed_relative_drift()])
    })?;
    let pick = |i: usize, abs: bool| -> Vec<f64> {
        drifts
            .iter()
            .map(|d| if abs { d[i].abs() } else { d[i] })
            .collect()
    };
    Ok(TransportDriftReport {
        dt: config.dt,
        ensemble_size,
        coarse: MeanEstimate::of(&pick(0, true)),
        fine: MeanEstimate::of(&pick(1, true)),
        signed_coarse: MeanEstimate::of(&pick(0, false)),
        signed_fine: MeanEstimate::of(&pick(1, false)),
    })
}
