use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::field::{SpectralScalar, SpectralVelocity};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Leray projection onto divergence-free, zero-mean fields:
/// `û(k) - k (k·û(k)) / |k|²` for `k ≠ 0`, zero at `k = 0`.
pub fn leray_project(f: &SpectralVelocity) -> SpectralVelocity {
    let mut out = f.clone();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place(f: &mut SpectralVelocity) {
    let grid = f.grid().clone();
    let [u, v] = f.comps_mut();
    for (i, j, k1, k2) in grid.resolved() {
        if k1 == 0 && k2 == 0 {
            u[[i, j]] = Complex64::new(0.0, 0.0);
            v[[i, j]] = Complex64::new(0.0, 0.0);
            continue;
        }
        let (k1, k2) = (k1 as f64, k2 as f64);
        let k_sq = k1 * k1 + k2 * k2;
        let dot = (u[[i, j]] * k1 + v[[i, j]] * k2) / k_sq;
        u[[i, j]] -= dot * k1;
        v[[i, j]] -= dot * k2;
    }
}

/// Coefficients of `∂f/∂x_axis`: multiplication by `i k_axis`.
pub fn spectral_derivative(f: &SpectralScalar, axis: usize) -> SpectralScalar {
    let grid = f.grid().clone();
    let coeffs = derivative_coeffs(&grid, f.coeffs(), axis);
    SpectralScalar::from_coeffs(&grid, coeffs).expect("same grid")
}

pub(crate) fn derivative_coeffs(
    grid: &TorusGrid,
    coeffs: &Array2<Complex64>,
    axis: usize,
) -> Array2<Complex64> {
    assert!(axis < 2, "axis index must be 0 or 1");
    let mut out = grid.zeros();
    for (i, j, k1, k2) in grid.resolved() {
        let k = if axis == 0 { k1 } else { k2 } as f64;
        out[[i, j]] = coeffs[[i, j]] * Complex64::new(0.0, k);
    }
    out
}

/// Gradient `∂_j u_m` of each component, sampled on the padded grid and
/// indexed `[m][j]`.
pub fn padded_gradient(f: &SpectralVelocity) -> [[Array2<f64>; 2]; 2] {
    let grid = f.grid();
    let d = |m: usize, j: usize| grid.to_padded(&derivative_coeffs(grid, f.comp(m), j));
    [[d(0, 0), d(0, 1)], [d(1, 0), d(1, 1)]]
}

/// Pointwise product `f g` truncated to the resolved lattice, computed on
/// the `3n/2` padded grid. Exact for resolved inputs.
pub fn dealiased_product(f: &SpectralScalar, g: &SpectralScalar) -> Result<SpectralScalar> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid().clone();
    let mut prod = f.padded();
    let pg = g.padded();
    Zip::from(&mut prod).and(&pg).for_each(|a, &b| *a *= b);
    SpectralScalar::from_coeffs(&grid, grid.from_padded(&prod))
}

/// `P_N((u·∇) v)` without the Leray projection.
pub fn advection(u: &SpectralVelocity, v: &SpectralVelocity) -> Result<SpectralVelocity> {
    u.ensure_same_grid(v)?;
    let grid = u.grid();
    let up = u.padded();
    let grad = padded_gradient(v);
    let mut out = [grid.zeros(), grid.zeros()];
    for m in 0..2 {
        let mut acc = &up[0] * &grad[m][0];
        Zip::from(&mut acc)
            .and(&up[1])
            .and(&grad[m][1])
            .for_each(|a, &b, &c| *a += b * c);
        out[m] = grid.from_padded(&acc);
    }
    let [a, b] = out;
    SpectralVelocity::from_coeffs(grid, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = grid(8);
        let f = SpectralScalar::from_fn(&g, |x, _| x.sin());
        let d = spectral_derivative(&f, 0);
        let expected = SpectralScalar::from_fn(&g, |x, _| x.cos());
        let mut diff = d.clone();
        diff.axpy(-1.0, &expected);
        assert!(diff.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = grid(8);
        let f = SpectralScalar::from_fn(&g, |_, _| 3.5);
        assert_eq!(spectral_derivative(&f, 1).max_abs_coeff(), 0.0);
    }

    #[test]
    fn mixed_mode_derivative() {
        let g = grid(16);
        let f = SpectralScalar::from_fn(&g, |x, y| (2.0 * x).sin() * (3.0 * y).cos());
        let d = spectral_derivative(&f, 1);
        let expected = SpectralScalar::from_fn(&g, |x, y| -3.0 * (2.0 * x).sin() * (3.0 * y).sin());
        let mut diff = d.clone();
        diff.axpy(-1.0, &expected);
        assert!(diff.max_abs_coeff() < 1e-14);
    }

    #[test]
    fn product_with_unit_is_identity() {
        let g = grid(8);
        let one = SpectralScalar::from_fn(&g, |_, _| 1.0);
        let f = SpectralScalar::from_fn(&g, |x, y| x.sin() + (2.0 * y).cos() * x.cos());
        let p = dealiased_product(&one, &f).unwrap();
        let mut diff = p.clone();
        diff.axpy(-1.0, &f);
        assert!(diff.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn sine_squared() {
        let g = grid(8);
        let s = SpectralScalar::from_fn(&g, |x, _| x.sin());
        let p = dealiased_product(&s, &s).unwrap();
        let expected = SpectralScalar::from_fn(&g, |x, _| 0.5 - 0.5 * (2.0 * x).cos());
        let mut diff = p.clone();
        diff.axpy(-1.0, &expected);
        assert!(diff.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn product_grid_mismatch() {
        let a = SpectralScalar::zeros(&grid(8));
        let b = SpectralScalar::zeros(&grid(16));
        assert!(matches!(dealiased_product(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn gradient_is_removed() {
        let g = grid(16);
        let phi = SpectralScalar::from_fn(&g, |x, y| (x + 2.0 * y).sin() + (3.0 * x).cos());
        let grad = SpectralVelocity::from_components(
            spectral_derivative(&phi, 0),
            spectral_derivative(&phi, 1),
        )
        .unwrap();
        assert!(leray_project(&grad).max_abs_coeff() < 1e-15);
    }
}
