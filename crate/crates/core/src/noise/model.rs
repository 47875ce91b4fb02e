use std::f64::consts::{PI, SQRT_2};

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    derivative_coeffs, padded_gradient, SpectralScalar, SpectralVelocity, TorusGrid,
};

/// Which real part of the complex Fourier mode a noise mode carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Polarization {
    Cos,
    Sin,
}

/// Wavevector, polarization and weight of one Stokes-eigenmode noise term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeLabel {
    pub k1: i64,
    pub k2: i64,
    pub polarization: Polarization,
    pub weight: f64,
}

impl ModeLabel {
    pub fn k_squared(&self) -> i64 {
        self.k1 * self.k1 + self.k2 * self.k2
    }
}

/// Parameters of the `amplitude · A^{-r}` covariance family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesSpectrum {
    pub k_modes: usize,
    pub exponent: f64,
    pub amplitude: f64,
}

/// Weight of the mode at `|k|²` in the `A^{-r}` family, normalized so the
/// lowest shell `|k|² = 1` carries `amplitude`. The ratio `λ_k / λ_1` does
/// not depend on the Reynolds number.
pub fn spectrum_weight(k_squared: f64, exponent: f64, amplitude: f64) -> f64 {
    amplitude * k_squared.powf(-exponent)
}

/// First `count` half-plane wavevectors ordered by `(|k|², k₁, k₂)`, each
/// component bounded by `max_component` when given.
pub fn half_plane_wavevectors(count: usize, max_component: Option<i64>) -> Vec<(i64, i64)> {
    let mut radius = 1i64;
    loop {
        let bound = max_component.map_or(radius, |m| m.min(radius));
        let mut found: Vec<(i64, i64)> = Vec::new();
        for k1 in 0..=bound {
            for k2 in -bound..=bound {
                if k1 == 0 && k2 <= 0 {
                    continue;
                }
                if k1 * k1 + k2 * k2 <= radius * radius {
                    found.push((k1, k2));
                }
            }
        }
        found.sort_by_key(|&(a, b)| (a * a + b * b, a, b));
        let exhausted = max_component.is_some_and(|m| radius > 2 * m);
        if found.len() >= count || exhausted {
            found.truncate(count);
            return found;
        }
        radius += 1;
    }
}

/// Mode labels in the documented order: `(|k|², k₁, k₂, polarization)`.
pub fn spectrum_labels(
    spectrum: &StokesSpectrum,
    max_component: Option<i64>,
) -> Vec<ModeLabel> {
    let wavevectors = half_plane_wavevectors(spectrum.k_modes.div_ceil(2), max_component);
    wavevectors
        .into_iter()
        .flat_map(|(k1, k2)| {
            let weight =
                spectrum_weight((k1 * k1 + k2 * k2) as f64, spectrum.exponent, spectrum.amplitude);
            [Polarization::Cos, Polarization::Sin].map(|polarization| ModeLabel {
                k1,
                k2,
                polarization,
                weight,
            })
        })
        .take(spectrum.k_modes)
        .collect()
}

/// Weighted unit-norm Stokes eigenmode `w · (k^⊥/|k|) c(k·x) / (π√2)` with
/// `c` the cosine or sine.
pub fn eigenmode(grid: &TorusGrid, label: &ModeLabel) -> SpectralVelocity {
    let (k1, k2) = (label.k1, label.k2);
    let norm = ((k1 * k1 + k2 * k2) as f64).sqrt();
    let dir = [-(k2 as f64) / norm, k1 as f64 / norm];
    let amp = label.weight / (PI * SQRT_2);
    // cos(k·x) = (e^{ik·x} + e^{-ik·x})/2, sin(k·x) = (e^{ik·x} - e^{-ik·x})/(2i)
    let (plus, minus) = match label.polarization {
        Polarization::Cos => (Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)),
        Polarization::Sin => (Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5)),
    };
    let mut mode = SpectralVelocity::zeros(grid);
    mode.set_coeff(k1, k2, [plus * amp * dir[0], plus * amp * dir[1]]);
    mode.set_coeff(-k1, -k2, [minus * amp * dir[0], minus * amp * dir[1]]);
    mode
}

/// Symmetric 2×2 field `a = Σ φ_k φ_kᵀ`, stored as three resolved scalars.
#[derive(Clone, Debug)]
pub struct VarianceTensor {
    pub a11: SpectralScalar,
    pub a12: SpectralScalar,
    pub a22: SpectralScalar,
}

impl VarianceTensor {
    pub fn component(&self, i: usize, j: usize) -> &SpectralScalar {
        match (i, j) {
            (0, 0) => &self.a11,
            (1, 1) => &self.a22,
            _ => &self.a12,
        }
    }

    /// Values on the base grid, `[a11, a12, a22]`.
    pub fn physical(&self) -> [Array2<f64>; 3] {
        [self.a11.physical(), self.a12.physical(), self.a22.physical()]
    }

    pub fn at(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let off = self.a12.eval(x, y);
        [[self.a11.eval(x, y), off], [off, self.a22.eval(x, y)]]
    }

    /// `∫ trace(a) dx`.
    pub fn trace_integral(&self) -> f64 {
        let area = self.a11.grid().area();
        area * (self.a11.coeff(0, 0).re + self.a22.coeff(0, 0).re)
    }

    /// Smallest eigenvalue over the base grid, relative to the local trace.
    pub fn min_relative_eigenvalue(&self) -> f64 {
        let [a11, a12, a22] = self.physical();
        let mut worst = f64::INFINITY;
        Zip::from(&a11).and(&a12).and(&a22).for_each(|&p, &q, &r| {
            let tr = p + r;
            let det = p * r - q * q;
            let disc = ((tr * tr / 4.0) - det).max(0.0).sqrt();
            let lo = tr / 2.0 - disc;
            let rel = if tr.abs() > 0.0 { lo / tr } else { 0.0 };
            worst = worst.min(rel);
        });
        worst
    }
}

/// Transport-noise model: weighted divergence-free modes `φ_k`, the variance
/// tensor `a`, the Itô–Stokes drift `u_s = ½∇·a`, and padded-grid samples
/// used by the pseudo-spectral operators.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    grid: TorusGrid,
    modes: Vec<SpectralVelocity>,
    labels: Option<Vec<ModeLabel>>,
    spectrum: Option<StokesSpectrum>,
    variance: VarianceTensor,
    drift: SpectralVelocity,
    padded_modes: Vec<[Array2<f64>; 2]>,
    padded_variance: [Array2<f64>; 3],
    padded_drift_gradient: [[Array2<f64>; 2]; 2],
}

/// Largest wavenumber component a noise mode may carry on `grid`: `a` then
/// stays resolved and `a ∇v` is alias-free on the padded grid.
pub fn max_noise_component(grid: &TorusGrid) -> i64 {
    grid.k_max() / 2
}

/// `K` lowest Stokes eigenmodes scaled by `amplitude · (λ_k/λ₁)^{-r}`.
pub fn build_noise_model(
    grid: &TorusGrid,
    k_modes: usize,
    spectrum_exponent: f64,
    amplitude: f64,
) -> Result<NoiseModel> {
    if k_modes == 0 {
        return Err(Error::invalid("k_modes", "need at least one noise mode"));
    }
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(Error::invalid("amplitude", "must be finite and non-negative"));
    }
    if !spectrum_exponent.is_finite() {
        return Err(Error::invalid("spectrum_exponent", "must be finite"));
    }
    let spectrum = StokesSpectrum {
        k_modes,
        exponent: spectrum_exponent,
        amplitude,
    };
    let labels = spectrum_labels(&spectrum, Some(max_noise_component(grid)));
    if labels.len() < k_modes {
        return Err(Error::TooManyModes {
            requested: k_modes,
            available: labels.len(),
        });
    }
    let modes = labels.iter().map(|l| eigenmode(grid, l)).collect();
    let mut model = NoiseModel::from_modes(grid, modes)?;
    model.labels = Some(labels);
    model.spectrum = Some(spectrum);
    Ok(model)
}

impl NoiseModel {
    /// Model from arbitrary weighted modes. Each mode is projected onto
    /// divergence-free fields and must fit the dealiasing band.
    pub fn from_modes(grid: &TorusGrid, modes: Vec<SpectralVelocity>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::invalid("modes", "need at least one noise mode"));
        }
        let limit = max_noise_component(grid);
        let mut projected = Vec::with_capacity(modes.len());
        for mode in modes {
            if mode.grid() != grid {
                return Err(Error::GridMismatch);
            }
            let mode = crate::spectral::leray_project(&mode);
            if bandwidth(&mode) > limit {
                return Err(Error::invalid(
                    "modes",
                    format!("noise mode bandwidth exceeds {limit} on this grid"),
                ));
            }
            projected.push(mode);
        }
        let padded_modes: Vec<[Array2<f64>; 2]> = projected.iter().map(|m| m.padded()).collect();

        let m = grid.padded_len();
        let mut pa = [
            Array2::<f64>::zeros((m, m)),
            Array2::<f64>::zeros((m, m)),
            Array2::<f64>::zeros((m, m)),
        ];
        for [px, py] in &padded_modes {
            Zip::from(&mut pa[0]).and(px).for_each(|a, &x| *a += x * x);
            Zip::from(&mut pa[1]).and(px).and(py).for_each(|a, &x, &y| *a += x * y);
            Zip::from(&mut pa[2]).and(py).for_each(|a, &y| *a += y * y);
        }
        let to_scalar = |values: &Array2<f64>| {
            SpectralScalar::from_coeffs(grid, grid.from_padded(values)).expect("same grid")
        };
        let variance = VarianceTensor {
            a11: to_scalar(&pa[0]),
            a12: to_scalar(&pa[1]),
            a22: to_scalar(&pa[2]),
        };
        let drift = half_divergence(grid, &variance);
        let padded_drift_gradient = padded_gradient(&drift);
        Ok(Self {
            grid: grid.clone(),
            modes: projected,
            labels: None,
            spectrum: None,
            variance,
            drift,
            padded_modes,
            padded_variance: pa,
            padded_drift_gradient,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn k_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[SpectralVelocity] {
        &self.modes
    }

    pub fn mode(&self, k: usize) -> Result<&SpectralVelocity> {
        self.modes.get(k).ok_or(Error::ModeIndex {
            index: k,
            k_modes: self.modes.len(),
        })
    }

    pub fn labels(&self) -> Option<&[ModeLabel]> {
        self.labels.as_deref()
    }

    pub fn spectrum(&self) -> Option<&StokesSpectrum> {
        self.spectrum.as_ref()
    }

    pub fn variance_tensor(&self) -> &VarianceTensor {
        &self.variance
    }

    pub fn ito_stokes_drift(&self) -> &SpectralVelocity {
        &self.drift
    }

    /// True when every mode vanishes.
    pub fn is_silent(&self) -> bool {
        self.modes.iter().all(|m| m.max_abs_coeff() == 0.0)
    }

    pub(crate) fn padded_modes(&self) -> &[[Array2<f64>; 2]] {
        &self.padded_modes
    }

    /// `[a11, a12, a22]` sampled on the padded grid.
    pub(crate) fn padded_variance(&self) -> &[Array2<f64>; 3] {
        &self.padded_variance
    }

    /// `∂_j (u_s)_m` on the padded grid, indexed `[m][j]`.
    pub(crate) fn padded_drift_gradient(&self) -> &[[Array2<f64>; 2]; 2] {
        &self.padded_drift_gradient
    }

    /// `σ dW = Σ_k φ_k dβ_k`.
    pub fn combine(&self, weights: &[f64]) -> Result<SpectralVelocity> {
        if weights.len() != self.modes.len() {
            return Err(Error::IncrementLength {
                expected: self.modes.len(),
                found: weights.len(),
            });
        }
        let mut out = SpectralVelocity::zeros(&self.grid);
        for (mode, &w) in self.modes.iter().zip(weights) {
            if w != 0.0 {
                out.axpy(w, mode);
            }
        }
        Ok(out)
    }

    /// `Σ_k |φ_k|²_H`.
    pub fn total_variance(&self) -> f64 {
        self.modes.iter().map(|m| m.h_norm().powi(2)).sum()
    }
}

/// `variance_tensor(model)`, exposed as a free function for symmetry with the
/// other noise operations.
pub fn variance_tensor(model: &NoiseModel) -> &VarianceTensor {
    model.variance_tensor()
}

/// Raw `½ ∇·a` (row-wise divergence); not projected.
pub fn ito_stokes_drift(model: &NoiseModel) -> &SpectralVelocity {
    model.ito_stokes_drift()
}

fn half_divergence(grid: &TorusGrid, a: &VarianceTensor) -> SpectralVelocity {
    let mut comps = [grid.zeros(), grid.zeros()];
    for (i, comp) in comps.iter_mut().enumerate() {
        let d0 = derivative_coeffs(grid, a.component(i, 0).coeffs(), 0);
        let d1 = derivative_coeffs(grid, a.component(i, 1).coeffs(), 1);
        *comp = (d0 + d1).mapv(|c| c * 0.5);
    }
    let [u, v] = comps;
    SpectralVelocity::from_coeffs(grid, u, v).expect("same grid")
}

/// Largest `max(|k₁|, |k₂|)` carrying a nonzero coefficient.
fn bandwidth(f: &SpectralVelocity) -> i64 {
    let grid = f.grid();
    grid.resolved()
        .filter(|&(i, j, _, _)| f.comp(0)[[i, j]].norm() > 0.0 || f.comp(1)[[i, j]].norm() > 0.0)
        .map(|(_, _, k1, k2)| k1.abs().max(k2.abs()))
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    #[test]
    fn ordering_is_lexicographic() {
        let spectrum = StokesSpectrum {
            k_modes: 8,
            exponent: 3.0,
            amplitude: 1.0,
        };
        let labels = spectrum_labels(&spectrum, None);
        let keys: Vec<_> = labels.iter().map(|l| (l.k1, l.k2, l.polarization)).collect();
        assert_eq!(
            keys,
            vec![
                (0, 1, Polarization::Cos),
                (0, 1, Polarization::Sin),
                (1, 0, Polarization::Cos),
                (1, 0, Polarization::Sin),
                (1, -1, Polarization::Cos),
                (1, -1, Polarization::Sin),
                (1, 1, Polarization::Cos),
                (1, 1, Polarization::Sin),
            ]
        );
        assert!((labels[4].weight - 2f64.powf(-3.0)).abs() < 1e-15);
    }

    #[test]
    fn eigenmodes_are_unit_divergence_free() {
        let g = grid(16);
        let spectrum = StokesSpectrum {
            k_modes: 12,
            exponent: 0.0,
            amplitude: 1.0,
        };
        for label in spectrum_labels(&spectrum, None) {
            let mode = eigenmode(&g, &label);
            assert!((mode.h_norm() - 1.0).abs() < 1e-14, "{label:?}");
            assert!(mode.max_divergence() < 1e-15);
            assert!(mode.hermitian_defect() < 1e-15);
        }
    }

    #[test]
    fn too_many_modes() {
        // N = 8 only admits |k_i| ≤ 1: four half-plane wavevectors.
        let err = build_noise_model(&grid(8), 9, 3.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::TooManyModes { requested: 9, available: 8 }));
    }

    #[test]
    fn zero_amplitude_is_silent() {
        let model = build_noise_model(&grid(16), 1, 3.0, 0.0).unwrap();
        assert!(model.is_silent());
        assert_eq!(model.variance_tensor().a11.max_abs_coeff(), 0.0);
        assert_eq!(model.ito_stokes_drift().max_abs_coeff(), 0.0);
    }

    #[test]
    fn single_mode_tensor_is_outer_product() {
        let g = grid(16);
        let model = build_noise_model(&g, 1, 3.0, 1.0).unwrap();
        let phi = &model.modes()[0];
        let a = model.variance_tensor();
        for &(x, y) in &[(0.1, 0.2), (1.3, 4.0), (5.9, 2.2)] {
            let (p, q) = phi.eval(x, y);
            let at = a.at(x, y);
            assert!((at[0][0] - p * p).abs() < 1e-14);
            assert!((at[0][1] - p * q).abs() < 1e-14);
            assert!((at[1][1] - q * q).abs() < 1e-14);
        }
        assert!(a.min_relative_eigenvalue() >= -1e-12);
    }

    #[test]
    fn conjugate_pair_is_homogeneous() {
        let g = grid(16);
        let model = build_noise_model(&g, 2, 3.0, 1.0).unwrap();
        let a = model.variance_tensor();
        for s in [&a.a11, &a.a12, &a.a22] {
            let mean = s.coeff(0, 0);
            let mut fluct = s.clone();
            fluct.set_coeff(0, 0, Complex64::new(0.0, 0.0));
            assert!(fluct.max_abs_coeff() < 1e-16 + 1e-14 * mean.norm());
        }
        assert!(model.ito_stokes_drift().max_abs_coeff() < 1e-16);
    }

    #[test]
    fn combine_checks_length() {
        let model = build_noise_model(&grid(16), 4, 3.0, 1.0).unwrap();
        assert!(model.combine(&[1.0, 2.0]).is_err());
        let one = model.combine(&[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(one.max_abs_diff(&model.modes()[2]), 0.0);
    }
}
