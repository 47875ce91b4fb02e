//! Summability of the noise in `H³` and the Sobolev norms of the drift.

use std::fmt;

use ndarray::{Array2, Zip};

use super::model::{spectrum_labels, NoiseModel, StokesSpectrum};
use crate::spectral::{derivative_coeffs, padded_gradient};

/// Tail ratio above which the noise is reported as not smooth enough.
pub const TAIL_THRESHOLD: f64 = 0.1;

/// Sobolev index of the summability requirement on the modes.
pub const SOBOLEV_INDEX: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    /// `S_j = Σ_{k ≤ j} ‖φ_k‖²_{H³}` for `j = 1..=K`.
    pub partial_sums: Vec<f64>,
    /// Last term of the series over `S_K`.
    pub last_term_ratio: f64,
    /// `(S_{2K} - S_K) / S_{2K}` for a spectral family, otherwise the last-term ratio.
    pub tail_ratio: f64,
    pub passed: bool,
    /// `‖u_s‖_{H³}`.
    pub drift_h3: f64,
    /// `‖a ∇u_s‖_V`.
    pub variance_drift_gradient_v: f64,
}

impl RegularityReport {
    pub fn partial_sum(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }
}

impl fmt::Display for RegularityReport {
    /// Flat `key = value` block.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k_modes = {}", self.partial_sums.len())?;
        writeln!(f, "h3_partial_sum = {}", self.partial_sum())?;
        writeln!(f, "last_term_ratio = {}", self.last_term_ratio)?;
        writeln!(f, "tail_ratio = {}", self.tail_ratio)?;
        writeln!(f, "tail_threshold = {}", TAIL_THRESHOLD)?;
        writeln!(f, "drift_h3 = {}", self.drift_h3)?;
        writeln!(f, "variance_drift_gradient_v = {}", self.variance_drift_gradient_v)?;
        writeln!(f, "passed = {}", self.passed)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// `‖φ‖²_{H³}` of a weighted unit eigenmode at `|k|²`.
fn family_term(k_squared: f64, weight: f64) -> f64 {
    (1.0 + k_squared).powf(SOBOLEV_INDEX) * weight * weight
}

/// Partial sums of `‖φ_k‖²_{H³}` over the first `count` modes of a spectral
/// family, independent of any grid.
pub fn family_partial_sums(spectrum: &StokesSpectrum, count: usize) -> Vec<f64> {
    let extended = StokesSpectrum {
        k_modes: count,
        ..*spectrum
    };
    let mut acc = 0.0;
    spectrum_labels(&extended, None)
        .iter()
        .map(|l| {
            acc += family_term(l.k_squared() as f64, l.weight);
            acc
        })
        .collect()
}

pub fn check_regularity(model: &NoiseModel) -> RegularityReport {
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = model
        .modes()
        .iter()
        .map(|m| {
            acc += m.sobolev_norm(SOBOLEV_INDEX).powi(2);
            acc
        })
        .collect();
    let s_k = *partial_sums.last().expect("model has modes");
    let last = model
        .modes()
        .last()
        .map(|m| m.sobolev_norm(SOBOLEV_INDEX).powi(2))
        .unwrap_or(0.0);
    let last_term_ratio = ratio(last, s_k);

    let tail_ratio = match model.spectrum() {
        Some(spectrum) => {
            let doubled = family_partial_sums(spectrum, 2 * spectrum.k_modes);
            let s_2k = *doubled.last().expect("non-empty");
            ratio(s_2k - doubled[spectrum.k_modes - 1], s_2k)
        }
        None => last_term_ratio,
    };

    let drift = model.ito_stokes_drift();
    RegularityReport {
        partial_sums,
        last_term_ratio,
        tail_ratio,
        passed: tail_ratio <= TAIL_THRESHOLD,
        drift_h3: drift.sobolev_norm(SOBOLEV_INDEX),
        variance_drift_gradient_v: variance_drift_gradient_norm(model),
    }
}

/// `‖a ∇u_s‖_V` with `(a∇u_s)_{mi} = Σ_j a_ij ∂_j (u_s)_m`.
fn variance_drift_gradient_norm(model: &NoiseModel) -> f64 {
    let grid = model.grid();
    let [a11, a12, a22] = model.padded_variance();
    let grad = padded_gradient(model.ito_stokes_drift());
    let a = |i: usize, j: usize| -> &Array2<f64> {
        match (i, j) {
            (0, 0) => a11,
            (1, 1) => a22,
            _ => a12,
        }
    };
    let mut total = 0.0;
    for m in 0..2 {
        for i in 0..2 {
            let mut flux = a(i, 0) * &grad[m][0];
            Zip::from(&mut flux)
                .and(a(i, 1))
                .and(&grad[m][1])
                .for_each(|f, &x, &y| *f += x * y);
            let coeffs = grid.from_padded(&flux);
            for axis in 0..2 {
                let d = derivative_coeffs(grid, &coeffs, axis);
                total += d.iter().map(|c| c.norm_sqr()).sum::<f64>();
            }
        }
    }
    (grid.area() * total).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::build_noise_model;
    use crate::spectral::TorusGrid;

    #[test]
    fn zero_amplitude_passes_with_zero_norms() {
        let grid = TorusGrid::new(16).unwrap();
        let model = build_noise_model(&grid, 4, 3.0, 0.0).unwrap();
        let report = check_regularity(&model);
        assert_eq!(report.partial_sum(), 0.0);
        assert_eq!(report.drift_h3, 0.0);
        assert_eq!(report.variance_drift_gradient_v, 0.0);
        assert!(report.passed);
    }

    #[test]
    fn report_is_key_value() {
        let grid = TorusGrid::new(16).unwrap();
        let model = build_noise_model(&grid, 4, 3.0, 1.0).unwrap();
        let text = check_regularity(&model).to_string();
        assert!(text.lines().all(|l| l.contains(" = ")));
        assert!(text.contains("passed = true"));
    }
}
