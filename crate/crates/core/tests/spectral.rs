use num_complex::Complex64;
use proptest::prelude::*;

use lu_flow::solver::{random_band, random_scalar};
use lu_flow::spectral::{
    dealiased_product, leray_project, snapshot::Snapshot, spectral_derivative, SpectralScalar,
    SpectralVelocity, TorusGrid,
};

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n).unwrap()
}

fn rough_field(g: &TorusGrid, seed: u64) -> SpectralVelocity {
    let k = g.k_max() as f64;
    SpectralVelocity::from_components(random_scalar(g, k, seed), random_scalar(g, k, seed + 1)).unwrap()
}

#[test]
fn leray_matches_dense_matrix_oracle() {
    let g = grid(8);
    let resolved: Vec<(usize, usize, i64, i64)> = g.resolved().collect();
    let dim = 2 * resolved.len();
    // Column c of the dense matrix is P applied to the c-th unit coefficient.
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for c in 0..dim {
        let mut e = SpectralVelocity::zeros(&g);
        let (axis, idx) = (c / resolved.len(), c % resolved.len());
        let (i, j, _, _) = resolved[idx];
        e.comp_mut(axis)[[i, j]] = Complex64::new(1.0, 0.0);
        let p = leray_project(&e);
        for (r, row) in m.iter_mut().enumerate() {
            let (axis, idx) = (r / resolved.len(), r % resolved.len());
            let (i, j, _, _) = resolved[idx];
            row[c] = p.comp(axis)[[i, j]];
        }
    }
    for r in 0..dim {
        for c in 0..dim {
            assert!((m[r][c] - m[c][r].conj()).norm() < 1e-15, "not Hermitian at {r},{c}");
            let sq: Complex64 = (0..dim).map(|k| m[r][k] * m[k][c]).sum();
            assert!((sq - m[r][c]).norm() < 1e-14, "not idempotent at {r},{c}");
        }
    }
    // Entries against the closed form δ_ab - k_a k_b / |k|².
    for (idx, &(_, _, k1, k2)) in resolved.iter().enumerate() {
        let k = [k1 as f64, k2 as f64];
        let k_sq = k[0] * k[0] + k[1] * k[1];
        for a in 0..2 {
            for b in 0..2 {
                let expected = if k_sq == 0.0 {
                    0.0
                } else {
                    f64::from(u8::from(a == b)) - k[a] * k[b] / k_sq
                };
                let got = m[a * resolved.len() + idx][b * resolved.len() + idx];
                assert!((got.re - expected).abs() < 1e-15 && got.im.abs() < 1e-15);
            }
        }
    }
}

#[test]
fn leray_agrees_with_stream_function_route() {
    let g = grid(16);
    let f = rough_field(&g, 3);
    let p = leray_project(&f);
    let i = Complex64::new(0.0, 1.0);
    for (_, _, k1, k2) in g.resolved() {
        let k_sq = (k1 * k1 + k2 * k2) as f64;
        let [f1, f2] = f.coeff(k1, k2);
        let expected = if k_sq == 0.0 {
            [Complex64::new(0.0, 0.0); 2]
        } else {
            // Δψ = curl f and Pf = ∇^⊥ψ = (-∂₂ψ, ∂₁ψ).
            let curl = i * k1 as f64 * f2 - i * k2 as f64 * f1;
            let psi = -curl / k_sq;
            [-i * k2 as f64 * psi, i * k1 as f64 * psi]
        };
        let got = p.coeff(k1, k2);
        assert!((got[0] - expected[0]).norm() < 1e-15, "k = ({k1},{k2})");
        assert!((got[1] - expected[1]).norm() < 1e-15, "k = ({k1},{k2})");
    }
}

#[test]
fn product_matches_direct_convolution() {
    let g = grid(8);
    let f = random_scalar(&g, 3.0, 1);
    let h = random_scalar(&g, 3.0, 2);
    let p = dealiased_product(&f, &h).unwrap();
    let res: Vec<(i64, i64)> = g.resolved().map(|(_, _, a, b)| (a, b)).collect();
    for &(k1, k2) in &res {
        let mut direct = Complex64::new(0.0, 0.0);
        for &(p1, p2) in &res {
            for &(q1, q2) in &res {
                if p1 + q1 == k1 && p2 + q2 == k2 {
                    direct += f.coeff(p1, p2) * h.coeff(q1, q2);
                }
            }
        }
        assert!((p.coeff(k1, k2) - direct).norm() < 1e-14, "k = ({k1},{k2})");
    }
}

#[test]
fn full_band_product_is_galerkin_truncation() {
    // Inputs fill the whole band; truncating the exact product is still
    // matched because the padded grid is alias-free.
    let g = grid(8);
    let f = random_scalar(&g, 10.0, 5);
    let h = random_scalar(&g, 10.0, 6);
    let p = dealiased_product(&f, &h).unwrap();
    let res: Vec<(i64, i64)> = g.resolved().map(|(_, _, a, b)| (a, b)).collect();
    let mut worst: f64 = 0.0;
    for &(k1, k2) in &res {
        let direct: Complex64 = res
            .iter()
            .flat_map(|&a| res.iter().map(move |&b| (a, b)))
            .filter(|&((p1, p2), (q1, q2))| p1 + q1 == k1 && p2 + q2 == k2)
            .map(|((p1, p2), (q1, q2))| f.coeff(p1, p2) * h.coeff(q1, q2))
            .sum();
        worst = worst.max((p.coeff(k1, k2) - direct).norm());
    }
    assert!(worst < 1e-14, "{worst}");
}

#[test]
fn derivative_of_band_limited_samples() {
    let g = grid(16);
    let f = SpectralScalar::from_fn(&g, |x, y| (3.0 * x).sin() * (2.0 * y).cos() + (x - y).cos());
    let fx = spectral_derivative(&f, 0);
    let exact = SpectralScalar::from_fn(&g, |x, y| 3.0 * (3.0 * x).cos() * (2.0 * y).cos() - (x - y).sin());
    let diff: f64 = fx
        .coeffs()
        .iter()
        .zip(exact.coeffs().iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(diff < 1e-14);
}

#[test]
fn snapshot_round_trip_is_exact() {
    let g = grid(16);
    let v = random_band(&g, 1.0, 7.0, 2.0, 9);
    let mut bytes = Vec::new();
    Snapshot::from_velocity(&v).write(&mut bytes).unwrap();
    assert_eq!(bytes.len(), 16 + 16 * 16 * 2 * 16);
    let back = Snapshot::read(bytes.as_slice()).unwrap().into_velocity(&g).unwrap();
    assert_eq!(back.max_abs_diff(&v), 0.0);
    assert!(Snapshot::read(&bytes[..100]).is_err());
    assert!(Snapshot::read(bytes.as_slice()).unwrap().into_velocity(&grid(8)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn leray_is_idempotent_and_self_adjoint(seed in 0u64..1_000_000) {
        let g = grid(16);
        let f = rough_field(&g, seed);
        let h = rough_field(&g, seed + 7);
        let pf = leray_project(&f);
        prop_assert!(leray_project(&pf).max_abs_diff(&pf) <= 1e-15 * pf.max_abs_coeff().max(1.0));
        let lhs = pf.inner(&h);
        let rhs = f.inner(&leray_project(&h));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * f.h_norm() * h.h_norm());
        prop_assert!(pf.max_divergence() <= 1e-14 * pf.max_abs_coeff().max(1e-300));
        prop_assert!(pf.h_norm() <= f.h_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn parseval_holds(seed in 0u64..1_000_000) {
        let g = grid(16);
        let v = rough_field(&g, seed);
        let [a, b] = v.physical();
        let dx = g.spacing();
        let quad: f64 = a.iter().chain(b.iter()).map(|x| x * x).sum::<f64>() * dx * dx;
        prop_assert!((quad - v.h_norm().powi(2)).abs() <= 1e-12 * quad);
    }

    #[test]
    fn transform_round_trip(seed in 0u64..1_000_000) {
        let g = grid(16);
        let q = random_scalar(&g, 7.0, seed);
        let back = SpectralScalar::from_physical(&g, &q.physical());
        let diff = q.coeffs().iter().zip(back.coeffs().iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-15);
        let padded_back = g.from_padded(&g.to_padded(q.coeffs()));
        let diff = q.coeffs().iter().zip(padded_back.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-15);
    }
}
