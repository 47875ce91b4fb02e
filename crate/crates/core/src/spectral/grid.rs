//! Periodic grid on the torus [0, 2π)² and its FFT plans.
//!
//! Coefficients live on an `n × n` array in FFT order: array index `i` maps
//! to wavenumber `i` for `i < n/2` and `i - n` for `i > n/2`. The Nyquist
//! row and column (`i = n/2`) are never retained, so the resolved lattice is
//! `|k₁|, |k₂| ≤ n/2 - 1`, which is symmetric under `k ↦ -k`.
//!
//! Quadratic products are evaluated on a padded physical grid of
//! `3n/2` points per dimension. Any product of two resolved fields is then
//! alias-free on the resolved lattice.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Side length of the periodic box.
pub const SIDE_LENGTH: f64 = 2.0 * PI;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(planner: &mut FftPlanner<f64>, len: usize) -> Self {
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }
}

struct GridInner {
    n: usize,
    padded: usize,
    base: Plans,
    fine: Plans,
}

/// Square Fourier grid with `n_modes` points (and FFT bins) per dimension.
///
/// Cloning is cheap: plans are shared behind an `Arc`.
#[derive(Clone)]
pub struct TorusGrid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("n_modes", &self.inner.n)
            .field("padded", &self.inner.padded)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n
    }
}

impl Eq for TorusGrid {}

impl TorusGrid {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes < 8 || n_modes % 2 != 0 {
            return Err(Error::InvalidGrid(n_modes));
        }
        let padded = 3 * n_modes / 2;
        let mut planner = FftPlanner::new();
        let base = Plans::new(&mut planner, n_modes);
        let fine = Plans::new(&mut planner, padded);
        Ok(Self {
            inner: Arc::new(GridInner {
                n: n_modes,
                padded,
                base,
                fine,
            }),
        })
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.inner.n
    }

    /// Points per dimension of the dealiasing grid.
    #[inline]
    pub fn padded_len(&self) -> usize {
        self.inner.padded
    }

    /// Largest resolved wavenumber component.
    #[inline]
    pub fn k_max(&self) -> i64 {
        (self.inner.n / 2) as i64 - 1
    }

    /// Signed wavenumber of array index `i`, or `None` for the Nyquist bin.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> Option<i64> {
        signed_wavenumber(i, self.inner.n)
    }

    /// Array index holding wavenumber `k`, if resolved.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        if k.abs() > self.k_max() {
            return None;
        }
        let n = self.inner.n as i64;
        Some(k.rem_euclid(n) as usize)
    }

    /// `|k|²` for array position `(i, j)`; zero on Nyquist bins.
    #[inline]
    pub fn k_squared(&self, i: usize, j: usize) -> f64 {
        match (self.wavenumber(i), self.wavenumber(j)) {
            (Some(a), Some(b)) => (a * a + b * b) as f64,
            _ => 0.0,
        }
    }

    /// Wavevector at `(i, j)`, `None` if either index is a Nyquist bin.
    #[inline]
    pub fn wavevector(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        Some((self.wavenumber(i)? as f64, self.wavenumber(j)? as f64))
    }

    /// Grid spacing of the base physical grid.
    pub fn spacing(&self) -> f64 {
        SIDE_LENGTH / self.inner.n as f64
    }

    /// Measure of the torus, `(2π)²`.
    pub fn area(&self) -> f64 {
        SIDE_LENGTH * SIDE_LENGTH
    }

    /// Iterates over every resolved array position with its wavevector.
    pub fn resolved(&self) -> impl Iterator<Item = (usize, usize, i64, i64)> + '_ {
        let n = self.inner.n;
        (0..n).flat_map(move |i| {
            (0..n).filter_map(move |j| {
                let k1 = self.wavenumber(i)?;
                let k2 = self.wavenumber(j)?;
                Some((i, j, k1, k2))
            })
        })
    }

    pub fn zeros(&self) -> Array2<Complex64> {
        Array2::zeros((self.inner.n, self.inner.n))
    }

    /// Physical values on the `n × n` grid of a resolved coefficient array.
    pub fn to_physical(&self, coeffs: &Array2<Complex64>) -> Array2<f64> {
        let mut work = coeffs.clone();
        fft2(&mut work, &self.inner.base.inverse);
        work.mapv(|c| c.re)
    }

    /// Coefficients of physical samples on the `n × n` grid. Nyquist bins are
    /// discarded.
    pub fn from_physical(&self, values: &Array2<f64>) -> Array2<Complex64> {
        let n = self.inner.n;
        let mut work = values.mapv(|v| Complex64::new(v, 0.0));
        fft2(&mut work, &self.inner.base.forward);
        let scale = 1.0 / (n * n) as f64;
        let mut out = self.zeros();
        for (i, j, _, _) in self.resolved() {
            out[[i, j]] = work[[i, j]] * scale;
        }
        out
    }

    /// Physical values on the padded grid.
    pub fn to_padded(&self, coeffs: &Array2<Complex64>) -> Array2<f64> {
        let m = self.inner.padded;
        let mut work = Array2::<Complex64>::zeros((m, m));
        for (i, j, k1, k2) in self.resolved() {
            let pi = k1.rem_euclid(m as i64) as usize;
            let pj = k2.rem_euclid(m as i64) as usize;
            work[[pi, pj]] = coeffs[[i, j]];
        }
        fft2(&mut work, &self.inner.fine.inverse);
        work.mapv(|c| c.re)
    }

    /// Resolved coefficients of samples taken on the padded grid; modes
    /// outside the resolved lattice are truncated.
    pub fn from_padded(&self, values: &Array2<f64>) -> Array2<Complex64> {
        let m = self.inner.padded;
        let mut work = values.mapv(|v| Complex64::new(v, 0.0));
        fft2(&mut work, &self.inner.fine.forward);
        let scale = 1.0 / (m * m) as f64;
        let mut out = self.zeros();
        for (i, j, k1, k2) in self.resolved() {
            let pi = k1.rem_euclid(m as i64) as usize;
            let pj = k2.rem_euclid(m as i64) as usize;
            out[[i, j]] = work[[pi, pj]] * scale;
        }
        out
    }

    /// Exact integral over the torus of a field sampled on the padded grid,
    /// provided its bandwidth is below the padded length.
    pub fn padded_integral(&self, values: &Array2<f64>) -> f64 {
        let m = self.inner.padded as f64;
        values.sum() * self.area() / (m * m)
    }

    /// Physical coordinate of padded-grid index `i`.
    pub fn padded_coord(&self, i: usize) -> f64 {
        SIDE_LENGTH * i as f64 / self.inner.padded as f64
    }

    /// Physical coordinate of base-grid index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        SIDE_LENGTH * i as f64 / self.inner.n as f64
    }
}

pub(crate) fn signed_wavenumber(i: usize, n: usize) -> Option<i64> {
    let half = n / 2;
    if i < half {
        Some(i as i64)
    } else if i == half {
        None
    } else {
        Some(i as i64 - n as i64)
    }
}

/// Unnormalized 2D transform of a square, standard-layout array.
fn fft2(data: &mut Array2<Complex64>, plan: &Arc<dyn Fft<f64>>) {
    let rows = data
        .as_slice_mut()
        .expect("spectral arrays are in standard layout");
    plan.process(rows);
    let mut transposed = data.t().as_standard_layout().into_owned();
    plan.process(
        transposed
            .as_slice_mut()
            .expect("transposed copy is in standard layout"),
    );
    data.assign(&transposed.t());
}
