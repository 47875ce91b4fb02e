//! Scalar and vector fields stored as truncated Fourier coefficients.
//!
//! With coefficients `ĉ(k)` the physical field is `f(x) = Σ_k ĉ(k) e^{ik·x}`,
//! so `∫ |f|² dx = (2π)² Σ_k |ĉ(k)|²`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Real scalar field on the torus.
#[derive(Clone, Debug)]
pub struct SpectralScalar {
    grid: TorusGrid,
    coeffs: Array2<Complex64>,
}

/// Real two-component field on the torus.
///
/// Fields produced by the operators and the solver are divergence-free with
/// zero mean; intermediate quantities (gradients, raw drifts) use the same
/// type without that guarantee.
#[derive(Clone, Debug)]
pub struct SpectralVelocity {
    grid: TorusGrid,
    comps: [Array2<Complex64>; 2],
}

fn check_shape(grid: &TorusGrid, coeffs: &Array2<Complex64>) -> Result<()> {
    let n = grid.n_modes();
    if coeffs.dim() != (n, n) {
        return Err(Error::ShapeMismatch {
            expected: n,
            found: coeffs.nrows(),
        });
    }
    Ok(())
}

fn inner_coeffs(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    Zip::from(a)
        .and(b)
        .fold(0.0, |acc, x, y| acc + (x * y.conj()).re)
}

/// Averages each coefficient with the conjugate of its mirror so the field
/// is exactly real, and clears unresolved bins.
fn symmetrize(grid: &TorusGrid, coeffs: &mut Array2<Complex64>) {
    let src = coeffs.clone();
    coeffs.fill(Complex64::new(0.0, 0.0));
    for (i, j, k1, k2) in grid.resolved() {
        let mi = grid.index_of(-k1).expect("lattice is symmetric");
        let mj = grid.index_of(-k2).expect("lattice is symmetric");
        coeffs[[i, j]] = 0.5 * (src[[i, j]] + src[[mi, mj]].conj());
    }
}

fn hermitian_defect(grid: &TorusGrid, coeffs: &Array2<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, j, k1, k2) in grid.resolved() {
        let mi = grid.index_of(-k1).expect("lattice is symmetric");
        let mj = grid.index_of(-k2).expect("lattice is symmetric");
        worst = worst.max((coeffs[[i, j]] - coeffs[[mi, mj]].conj()).norm());
    }
    worst
}

impl SpectralScalar {
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: grid.zeros(),
        }
    }

    pub fn from_coeffs(grid: &TorusGrid, coeffs: Array2<Complex64>) -> Result<Self> {
        check_shape(grid, &coeffs)?;
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Samples `f` on the base grid and transforms.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n_modes();
        let values = Array2::from_shape_fn((n, n), |(i, j)| f(grid.coord(i), grid.coord(j)));
        Self::from_physical(grid, &values)
    }

    pub fn from_physical(grid: &TorusGrid, values: &Array2<f64>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: grid.from_physical(values),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<Complex64> {
        self.coeffs
    }

    /// Coefficient at wavenumber `(k1, k2)`; zero if unresolved.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        match (self.grid.index_of(k1), self.grid.index_of(k2)) {
            (Some(i), Some(j)) => self.coeffs[[i, j]],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set_coeff(&mut self, k1: i64, k2: i64, value: Complex64) {
        if let (Some(i), Some(j)) = (self.grid.index_of(k1), self.grid.index_of(k2)) {
            self.coeffs[[i, j]] = value;
        }
    }

    pub fn physical(&self) -> Array2<f64> {
        self.grid.to_physical(&self.coeffs)
    }

    pub fn padded(&self) -> Array2<f64> {
        self.grid.to_padded(&self.coeffs)
    }

    /// Point evaluation of the trigonometric polynomial.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.grid
            .resolved()
            .map(|(i, j, k1, k2)| {
                let phase = k1 as f64 * x + k2 as f64 * y;
                (self.coeffs[[i, j]] * Complex64::new(phase.cos(), phase.sin())).re
            })
            .sum()
    }

    /// `L²` inner product over the torus.
    pub fn inner(&self, other: &Self) -> f64 {
        self.grid.area() * inner_coeffs(&self.coeffs, &other.coeffs)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// `‖∇q‖_{L²}`.
    pub fn gradient_norm(&self) -> f64 {
        let s: f64 = self
            .grid
            .resolved()
            .map(|(i, j, _, _)| self.grid.k_squared(i, j) * self.coeffs[[i, j]].norm_sqr())
            .sum();
        (self.grid.area() * s).sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn symmetrize(&mut self) {
        symmetrize(&self.grid, &mut self.coeffs);
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.grid, &self.coeffs)
    }

    pub fn scale(&mut self, factor: f64) {
        self.coeffs.mapv_inplace(|c| c * factor);
    }

    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        Zip::from(&mut self.coeffs)
            .and(&other.coeffs)
            .for_each(|a, b| *a += b * alpha);
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl SpectralVelocity {
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            grid: grid.clone(),
            comps: [grid.zeros(), grid.zeros()],
        }
    }

    pub fn from_coeffs(grid: &TorusGrid, u: Array2<Complex64>, v: Array2<Complex64>) -> Result<Self> {
        check_shape(grid, &u)?;
        check_shape(grid, &v)?;
        Ok(Self {
            grid: grid.clone(),
            comps: [u, v],
        })
    }

    pub fn from_components(u: SpectralScalar, v: SpectralScalar) -> Result<Self> {
        if u.grid != v.grid {
            return Err(Error::GridMismatch);
        }
        let grid = u.grid.clone();
        Ok(Self {
            grid,
            comps: [u.into_coeffs(), v.into_coeffs()],
        })
    }

    /// Samples a vector function on the base grid and transforms.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let u = SpectralScalar::from_fn(grid, |x, y| f(x, y).0);
        let v = SpectralScalar::from_fn(grid, |x, y| f(x, y).1);
        Self::from_components(u, v).expect("same grid")
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn comp(&self, axis: usize) -> &Array2<Complex64> {
        &self.comps[axis]
    }

    pub fn comp_mut(&mut self, axis: usize) -> &mut Array2<Complex64> {
        &mut self.comps[axis]
    }

    pub fn comps(&self) -> &[Array2<Complex64>; 2] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [Array2<Complex64>; 2] {
        &mut self.comps
    }

    pub fn component(&self, axis: usize) -> SpectralScalar {
        SpectralScalar {
            grid: self.grid.clone(),
            coeffs: self.comps[axis].clone(),
        }
    }

    /// Coefficient pair at wavenumber `(k1, k2)`.
    pub fn coeff(&self, k1: i64, k2: i64) -> [Complex64; 2] {
        match (self.grid.index_of(k1), self.grid.index_of(k2)) {
            (Some(i), Some(j)) => [self.comps[0][[i, j]], self.comps[1][[i, j]]],
            _ => [Complex64::new(0.0, 0.0); 2],
        }
    }

    pub fn set_coeff(&mut self, k1: i64, k2: i64, value: [Complex64; 2]) {
        if let (Some(i), Some(j)) = (self.grid.index_of(k1), self.grid.index_of(k2)) {
            self.comps[0][[i, j]] = value[0];
            self.comps[1][[i, j]] = value[1];
        }
    }

    /// Physical components on the base grid.
    pub fn physical(&self) -> [Array2<f64>; 2] {
        [
            self.grid.to_physical(&self.comps[0]),
            self.grid.to_physical(&self.comps[1]),
        ]
    }

    /// Physical components on the padded grid.
    pub fn padded(&self) -> [Array2<f64>; 2] {
        [
            self.grid.to_padded(&self.comps[0]),
            self.grid.to_padded(&self.comps[1]),
        ]
    }

    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        (self.component(0).eval(x, y), self.component(1).eval(x, y))
    }

    /// `(u, w)_H`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.grid.area()
            * (inner_coeffs(&self.comps[0], &other.comps[0])
                + inner_coeffs(&self.comps[1], &other.comps[1]))
    }

    /// `|u|_H`.
    pub fn h_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// `((u, w))_V = (∇u, ∇w)_{L²}`.
    pub fn inner_v(&self, other: &Self) -> f64 {
        self.weighted_inner(other, |k2| k2)
    }

    /// `‖u‖_V = ‖∇u‖_{L²}`.
    pub fn v_norm(&self) -> f64 {
        self.inner_v(self).max(0.0).sqrt()
    }

    /// Dual norm `‖f‖_{V'}`, the `H⁻¹` norm on zero-mean fields.
    pub fn v_dual_norm(&self) -> f64 {
        self.weighted_inner(self, |k2| if k2 > 0.0 { 1.0 / k2 } else { 0.0 })
            .max(0.0)
            .sqrt()
    }

    /// `‖u‖_{D(A^α)}` with multiplier `(|k|²/Re)^α`.
    pub fn stokes_power_norm(&self, alpha: f64, reynolds: f64) -> f64 {
        self.weighted_inner(self, |k2| {
            if k2 > 0.0 {
                (k2 / reynolds).powf(2.0 * alpha)
            } else {
                0.0
            }
        })
        .max(0.0)
        .sqrt()
    }

    /// Sobolev norm `‖u‖_{H^s}` with multiplier `(1 + |k|²)^s`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.weighted_inner(self, |k2| (1.0 + k2).powf(s))
            .max(0.0)
            .sqrt()
    }

    fn weighted_inner(&self, other: &Self, weight: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (i, j, _, _) in self.grid.resolved() {
            let w = weight(self.grid.k_squared(i, j));
            for c in 0..2 {
                acc += w * (self.comps[c][[i, j]] * other.comps[c][[i, j]].conj()).re;
            }
        }
        self.grid.area() * acc
    }

    /// Largest `|k·û(k)|` over the lattice.
    pub fn max_divergence(&self) -> f64 {
        self.grid
            .resolved()
            .map(|(i, j, k1, k2)| {
                (self.comps[0][[i, j]] * k1 as f64 + self.comps[1][[i, j]] * k2 as f64).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude, used as the scale for relative checks.
    pub fn max_abs_coeff(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest coefficientwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(other.comps.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
    }

    pub fn mean(&self) -> [Complex64; 2] {
        [self.comps[0][[0, 0]], self.comps[1][[0, 0]]]
    }

    pub fn symmetrize(&mut self) {
        for c in self.comps.iter_mut() {
            symmetrize(&self.grid, c);
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| hermitian_defect(&self.grid, c))
            .fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: f64) {
        for c in self.comps.iter_mut() {
            c.mapv_inplace(|z| z * factor);
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.comps.iter_mut().zip(other.comps.iter()) {
            Zip::from(a).and(b).for_each(|x, y| *x += y * alpha);
        }
    }

    /// Multiplies each coefficient by `m(|k|²)`.
    pub fn apply_multiplier(&mut self, m: impl Fn(f64) -> f64) {
        let n = self.grid.n_modes();
        for i in 0..n {
            for j in 0..n {
                let factor = m(self.grid.k_squared(i, j));
                for c in self.comps.iter_mut() {
                    c[[i, j]] *= factor;
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

impl Add<&SpectralVelocity> for &SpectralVelocity {
    type Output = SpectralVelocity;

    fn add(self, rhs: &SpectralVelocity) -> SpectralVelocity {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub<&SpectralVelocity> for &SpectralVelocity {
    type Output = SpectralVelocity;

    fn sub(self, rhs: &SpectralVelocity) -> SpectralVelocity {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl AddAssign<&SpectralVelocity> for SpectralVelocity {
    fn add_assign(&mut self, rhs: &SpectralVelocity) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&SpectralVelocity> for SpectralVelocity {
    fn sub_assign(&mut self, rhs: &SpectralVelocity) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul<f64> for &SpectralVelocity {
    type Output = SpectralVelocity;

    fn mul(self, rhs: f64) -> SpectralVelocity {
        self.scaled(rhs)
    }
}

impl Neg for &SpectralVelocity {
    type Output = SpectralVelocity;

    fn neg(self) -> SpectralVelocity {
        self.scaled(-1.0)
    }
}
