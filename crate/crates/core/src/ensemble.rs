//! Fan-out of independent ensemble members.
//!
//! Members are mapped in index order and collected in that order, so the
//! result is the same whichever [`Execution`] runs it.

use crate::error::Result;
use crate::solver::{run, SolverConfig, TrajectoryRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon's thread pool; sequential when built without the `parallel`
    /// feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Applies `f` to each member index, preserving order. The first error in
/// index order is returned.
pub fn map_members<T, F>(exec: Execution, members: &[u64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    match exec {
        Execution::Sequential => members.iter().map(|&m| f(m)).collect(),
        Execution::Parallel => parallel_map(members, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(members: &[u64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    let out: Vec<Result<T>> = members.par_iter().map(|&m| f(m)).collect();
    out.into_iter().collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(members: &[u64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    members.iter().map(|&m| f(m)).collect()
}

/// Sets the size of the global worker pool. Has no effect without the
/// `parallel` feature or once the pool is already running.
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

/// Members `0..size` of `config`.
pub fn run_ensemble(
    config: &SolverConfig,
    size: usize,
    exec: Execution,
) -> Result<Vec<TrajectoryRecord>> {
    let members: Vec<u64> = (0..size as u64).collect();
    map_members(exec, &members, |m| run(config, m))
}
