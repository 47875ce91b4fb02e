mod common;

use proptest::prelude::*;

use lu_flow::noise::{
    build_noise_model, check_regularity, family_partial_sums, half_plane_wavevectors, StokesSpectrum,
    WienerPath, TAIL_THRESHOLD,
};
use lu_flow::spectral::TorusGrid;

use common::mixed_model;

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n).unwrap()
}

#[test]
fn variance_tensor_is_pointwise_sum_of_outer_products() {
    let g = grid(32);
    for model in [build_noise_model(&g, 6, 2.0, 0.8).unwrap(), mixed_model(&g, 1.3)] {
        let a = model.variance_tensor();
        for &(x, y) in &[(0.1, 0.2), (1.7, 4.0), (3.3, 0.9), (5.9, 6.1)] {
            let mut direct = [[0.0; 2]; 2];
            for phi in model.modes() {
                let (p, q) = phi.eval(x, y);
                let v = [p, q];
                for i in 0..2 {
                    for j in 0..2 {
                        direct[i][j] += v[i] * v[j];
                    }
                }
            }
            let got = a.at(x, y);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((got[i][j] - direct[i][j]).abs() < 1e-13, "a_{i}{j} at ({x},{y})");
                }
            }
        }
    }
}

#[test]
fn trace_integral_is_total_mode_energy() {
    let g = grid(32);
    let model = mixed_model(&g, 0.9);
    let total: f64 = model.modes().iter().map(|m| m.h_norm().powi(2)).sum();
    assert!((model.variance_tensor().trace_integral() - total).abs() < 1e-12 * total);
    assert!((model.total_variance() - total).abs() < 1e-12 * total);
}

#[test]
fn eigenmodes_have_unit_weighted_norm() {
    let g = grid(32);
    let model = build_noise_model(&g, 8, 1.5, 2.0).unwrap();
    for (mode, label) in model.modes().iter().zip(model.labels().unwrap()) {
        assert!((mode.h_norm() - label.weight).abs() < 1e-14);
        assert!(mode.max_divergence() < 1e-15);
    }
}

#[test]
fn single_wavevector_family_has_constant_variance_and_no_drift() {
    let g = grid(32);
    let model = build_noise_model(&g, 4, 3.0, 1.0).unwrap();
    assert_eq!(model.ito_stokes_drift().max_abs_coeff(), 0.0);
    let a = model.variance_tensor().at(0.3, 2.2);
    let b = model.variance_tensor().at(4.1, 5.0);
    for i in 0..2 {
        for j in 0..2 {
            assert!((a[i][j] - b[i][j]).abs() < 1e-15);
        }
    }
}

#[test]
fn drift_matches_finite_differences_of_variance() {
    let g = grid(32);
    let model = mixed_model(&g, 1.0);
    let a = model.variance_tensor();
    let us = model.ito_stokes_drift();
    let h = 1e-4;
    for &(x, y) in &[(0.4, 1.1), (2.5, 5.3), (4.4, 3.0)] {
        let d = |i: usize, j: usize, dir: usize| {
            let (dx, dy) = if dir == 0 { (h, 0.0) } else { (0.0, h) };
            (a.at(x + dx, y + dy)[i][j] - a.at(x - dx, y - dy)[i][j]) / (2.0 * h)
        };
        let fd = [0.5 * (d(0, 0, 0) + d(0, 1, 1)), 0.5 * (d(1, 0, 0) + d(1, 1, 1))];
        let (u1, u2) = us.eval(x, y);
        assert!((u1 - fd[0]).abs() < 1e-7, "{u1} vs {}", fd[0]);
        assert!((u2 - fd[1]).abs() < 1e-7, "{u2} vs {}", fd[1]);
    }
    assert!(us.max_abs_coeff() > 1e-3);
}

#[test]
fn wavevector_ordering() {
    let ks = half_plane_wavevectors(6, None);
    assert_eq!(ks, vec![(0, 1), (1, 0), (1, -1), (1, 1), (0, 2), (2, 0)]);
}

#[test]
fn regularity_separates_smooth_from_rough() {
    let g = grid(32);
    let smooth = check_regularity(&build_noise_model(&g, 4, 3.0, 1.0).unwrap());
    let rough = check_regularity(&build_noise_model(&g, 4, 1.0, 1.0).unwrap());
    assert!(smooth.passed && smooth.tail_ratio < TAIL_THRESHOLD);
    assert!(!rough.passed && rough.tail_ratio > TAIL_THRESHOLD);
    assert!(smooth.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    let text = smooth.to_string();
    assert!(text.contains("passed = true"));
}

#[test]
fn family_sums_do_not_depend_on_the_grid() {
    let spectrum = StokesSpectrum {
        k_modes: 4,
        exponent: 3.0,
        amplitude: 1.0,
    };
    let sums = family_partial_sums(&spectrum, 8);
    // Lowest shell |k|² = 1: (1 + 1)³ per mode at unit weight.
    assert!((sums[0] - 8.0).abs() < 1e-12);
    assert!((sums[3] - 32.0).abs() < 1e-12);
}

#[test]
fn too_many_modes_is_reported() {
    let g = grid(8);
    assert!(build_noise_model(&g, 10_000, 3.0, 1.0).is_err());
}

#[test]
fn increments_have_brownian_covariance() {
    // 4 modes, 20 000 steps: sample covariance within 5 standard errors.
    let dt = 1e-2;
    let path = WienerPath::new(11, dt, 20_000, 4).unwrap();
    let n = path.n_steps() as f64;
    let rows: Vec<&[f64]> = (0..path.n_steps()).map(|s| path.sample_increments(s).unwrap()).collect();
    for a in 0..4 {
        for b in 0..4 {
            let cov = rows.iter().map(|r| r[a] * r[b]).sum::<f64>() / n;
            let expected = if a == b { dt } else { 0.0 };
            let se = dt * if a == b { (2.0 / n).sqrt() } else { (1.0 / n).sqrt() };
            assert!((cov - expected).abs() < 5.0 * se, "cov[{a}][{b}] = {cov}");
        }
    }
}

#[test]
fn coarsening_preserves_the_path() {
    let fine = WienerPath::new(3, 1e-3, 64, 2).unwrap();
    let coarse = fine.coarsen(4).unwrap();
    let fc = fine.cumulative();
    let cc = coarse.cumulative();
    for (s, row) in cc.iter().enumerate() {
        for k in 0..2 {
            assert!((row[k] - fc[4 * s][k]).abs() < 1e-15);
        }
    }
    assert!(fine.coarsen(5).is_err());
    let anti = fine.negated();
    assert_eq!(anti.sample_increments(3).unwrap()[1], -fine.sample_increments(3).unwrap()[1]);
}

#[test]
fn members_draw_distinct_streams() {
    let a = WienerPath::for_member(7, 0, 1e-3, 10, 4).unwrap();
    let b = WienerPath::for_member(7, 1, 1e-3, 10, 4).unwrap();
    let a2 = WienerPath::for_member(7, 0, 1e-3, 10, 4).unwrap();
    assert_eq!(a, a2);
    assert_ne!(a.increments(), b.increments());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn drift_is_quadratic_in_amplitude(c in 0.1f64..5.0) {
        let g = grid(16);
        let base = mixed_model(&g, 1.0);
        let scaled = mixed_model(&g, c);
        let us = base.ito_stokes_drift();
        let err = scaled.ito_stokes_drift().max_abs_diff(&us.scaled(c * c));
        prop_assert!(err <= 1e-12 * c * c * us.max_abs_coeff());
        let a = base.variance_tensor().at(1.0, 2.0);
        let b = scaled.variance_tensor().at(1.0, 2.0);
        prop_assert!((b[0][1] - c * c * a[0][1]).abs() <= 1e-12 * c * c);
    }

    #[test]
    fn variance_is_positive_semidefinite(r in 0.5f64..4.0, k in 1usize..12) {
        let g = grid(16);
        let model = build_noise_model(&g, k, r, 1.0).unwrap();
        prop_assert!(model.variance_tensor().min_relative_eigenvalue() >= -1e-12);
    }
}
