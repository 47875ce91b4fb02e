use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::config::InitialCondition;
use crate::error::Result;
use crate::noise::half_plane_wavevectors;
use crate::spectral::{leray_project_in_place, snapshot, SpectralScalar, SpectralVelocity, TorusGrid};

/// Classical Taylor–Green vortex `(cos x sin y, -sin x cos y)`, an exact
/// decaying solution with `|k|² = 2`.
pub fn taylor_green(grid: &TorusGrid) -> SpectralVelocity {
    let q = Complex64::new(0.0, 0.25);
    let mut v = SpectralVelocity::zeros(grid);
    // Coefficients at (±1, ±1): -i sign(k₂)/4 for cos x sin y and
    // i sign(k₁)/4 for -sin x cos y.
    for (k1, k2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let s1 = k1 as f64;
        let s2 = k2 as f64;
        v.set_coeff(k1, k2, [-q * s2, q * s1]);
    }
    v
}

fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    ((rng.next_u64() >> 11) as f64 + 0.5) * SCALE
}

/// Divergence-free field with unit-modulus random-phase coefficients on the
/// shell `k_min ≤ |k| ≤ k_max`, scaled to `½|v|²_H = energy`.
pub fn random_band(
    grid: &TorusGrid,
    k_min: f64,
    k_max: f64,
    energy: f64,
    seed: u64,
) -> SpectralVelocity {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut v = SpectralVelocity::zeros(grid);
    let bound = grid.k_max();
    let count = (2 * bound + 1) * (2 * bound + 1);
    for (k1, k2) in half_plane_wavevectors(count as usize, Some(bound)) {
        let k = ((k1 * k1 + k2 * k2) as f64).sqrt();
        if k < k_min || k > k_max {
            continue;
        }
        // Amplitude along k^⊥ only, so the field is solenoidal by construction.
        let phase = 2.0 * std::f64::consts::PI * uniform(&mut rng);
        let c = Complex64::from_polar(1.0, phase);
        let dir = [-(k2 as f64) / k, k1 as f64 / k];
        v.set_coeff(k1, k2, [c * dir[0], c * dir[1]]);
        v.set_coeff(-k1, -k2, [c.conj() * dir[0], c.conj() * dir[1]]);
    }
    leray_project_in_place(&mut v);
    let current = 0.5 * v.h_norm().powi(2);
    if current > 0.0 {
        v.scale((energy / current).sqrt());
    }
    v
}

/// Scalar with random phases on `1 ≤ |k| ≤ k_max` and unit `L²` norm.
pub fn random_scalar(grid: &TorusGrid, k_max: f64, seed: u64) -> SpectralScalar {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut q = SpectralScalar::zeros(grid);
    let bound = grid.k_max();
    let count = (2 * bound + 1) * (2 * bound + 1);
    for (k1, k2) in half_plane_wavevectors(count as usize, Some(bound)) {
        let k = ((k1 * k1 + k2 * k2) as f64).sqrt();
        if k > k_max {
            continue;
        }
        let phase = 2.0 * std::f64::consts::PI * uniform(&mut rng);
        let c = Complex64::from_polar(1.0 / k, phase);
        q.set_coeff(k1, k2, c);
        q.set_coeff(-k1, -k2, c.conj());
    }
    let norm = q.l2_norm();
    if norm > 0.0 {
        q.scale(1.0 / norm);
    }
    q
}

pub fn make_initial(kind: &InitialCondition, grid: &TorusGrid) -> Result<SpectralVelocity> {
    match kind {
        InitialCondition::TaylorGreen => Ok(taylor_green(grid)),
        InitialCondition::RandomBand {
            k_min,
            k_max,
            energy,
            seed,
        } => Ok(random_band(grid, *k_min, *k_max, *energy, *seed)),
        InitialCondition::File(path) => snapshot::load_velocity(path, grid),
    }
}
