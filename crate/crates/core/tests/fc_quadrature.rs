//! Franck-Condon factors against Gauss-Hermite quadrature of shifted Hermite functions.

use nalgebra::DMatrix;
use proptest::prelude::*;
use vibdimer::franck_condon::{franck_condon_2d, FcTable};
use vibdimer::franck_condon_1d;

/// Nodes and weights for `∫ e^{−u²} f(u) du`: nodes are the eigenvalues of the
/// Hermite Jacobi matrix, weights the Christoffel numbers `1/Σ_k h̃_k(x)²`.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let mut nodes: Vec<f64> = jac.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let weights = nodes.iter().map(|&x| 1.0 / hermite(n - 1, x).iter().map(|h| h * h).sum::<f64>()).collect();
    (nodes, weights)
}

/// Orthonormal Hermite polynomials `h̃_0..h̃_nmax` at `x` (Hermite functions
/// without the Gaussian factor).
fn hermite(nmax: usize, x: f64) -> Vec<f64> {
    let mut h = vec![0.0; nmax + 1];
    h[0] = std::f64::consts::PI.powf(-0.25);
    if nmax > 0 {
        h[1] = std::f64::consts::SQRT_2 * x * h[0];
    }
    for k in 2..=nmax {
        let kf = k as f64;
        h[k] = (2.0 / kf).sqrt() * x * h[k - 1] - ((kf - 1.0) / kf).sqrt() * h[k - 2];
    }
    h
}

/// `∫ φ_m(x) φ_n(x − √2 λ) dx`: overlap of an oscillator state with a number
/// state of an oscillator whose minimum sits `λ` amplitude units away.
fn quadrature_table(nmax: usize, lambda: f64, nodes: &[f64], weights: &[f64]) -> Vec<Vec<f64>> {
    let s = std::f64::consts::SQRT_2 * lambda;
    let gauss = (-s * s / 4.0).exp();
    let mut out = vec![vec![0.0; nmax + 1]; nmax + 1];
    for (&u, &w) in nodes.iter().zip(weights) {
        let left = hermite(nmax, u + s / 2.0);
        let right = hermite(nmax, u - s / 2.0);
        for m in 0..=nmax {
            for n in 0..=nmax {
                out[m][n] += w * gauss * left[m] * right[n];
            }
        }
    }
    out
}

#[test]
fn recurrence_matches_quadrature_on_a_dense_lambda_grid() {
    let (nodes, weights) = gauss_hermite(80);
    let mut worst = 0.0f64;
    for k in 0..=60 {
        let lambda = -3.0 + 6.0 * k as f64 / 60.0;
        let oracle = quadrature_table(20, lambda, &nodes, &weights);
        let table = FcTable::square(20, lambda).unwrap();
        for m in 0..=20 {
            for n in 0..=20 {
                worst = worst.max((table.get(m, n) - oracle[m][n]).abs());
                assert!((franck_condon_1d(m, n, lambda).unwrap() - table.get(m, n)).abs() < 1e-15);
            }
        }
    }
    assert!(worst < 1e-10, "max deviation {worst:e}");
}

#[test]
fn quadrature_oracle_is_orthonormal_at_zero_shift() {
    let (nodes, weights) = gauss_hermite(80);
    let t = quadrature_table(20, 0.0, &nodes, &weights);
    for m in 0..=20 {
        for n in 0..=20 {
            let expect = if m == n { 1.0 } else { 0.0 };
            assert!((t[m][n] - expect).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn symmetry_under_index_swap(m in 0usize..25, n in 0usize..25, lambda in -3.0f64..3.0) {
        let a = franck_condon_1d(m, n, lambda).unwrap();
        let b = franck_condon_1d(n, m, lambda).unwrap();
        let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((a - sign * b).abs() < 1e-12);
        let c = franck_condon_1d(n, m, -lambda).unwrap();
        prop_assert!((a - c).abs() < 1e-12);
    }

    #[test]
    fn two_mode_factor_is_a_product(mp in 0usize..8, np in 0usize..8, m in 0usize..8, n in 0usize..8, d in 0.0f64..2.5) {
        let two = franck_condon_2d(mp, np, m, n, d).unwrap();
        let one = franck_condon_1d(mp, m, d).unwrap() * franck_condon_1d(np, n, -d).unwrap();
        prop_assert!((two - one).abs() < 1e-15);
    }

    #[test]
    fn rows_are_normalized_with_a_large_partner_range(m in 0usize..10, lambda in -2.5f64..2.5) {
        let s: f64 = (0..120).map(|n| franck_condon_1d(m, n, lambda).unwrap().powi(2)).sum();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }
}
