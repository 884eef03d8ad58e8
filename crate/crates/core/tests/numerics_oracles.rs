use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruinld_core::numerics::{find_root_default, log_add_exp, log_normal_cdf, normal_cdf, solve_tridiagonal, Bracket};
use ruinld_core::ou_rates::{rate_infinite, solve_topt, OuModel};
use ruinld_core::ExpBoundary;

/// Dense Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

#[test]
fn tridiagonal_matches_dense_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 100;
    let sub: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sup: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
    let diag: Vec<f64> = (0..n).map(|_| rng.random_range(2.5..4.0)).collect();
    let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let mut dense = vec![vec![0.0; n]; n];
    for i in 0..n {
        dense[i][i] = diag[i];
        if i + 1 < n {
            dense[i][i + 1] = sup[i];
            dense[i + 1][i] = sub[i];
        }
    }
    let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
    let y = dense_solve(dense, rhs);
    let gap = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-12, "{gap}");
}

#[test]
fn normal_cdf_matches_simpson() {
    let density = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let simpson = |a: f64, b: f64, n: usize| {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|k| density(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
        (density(a) + inner + density(b)) * h / 3.0
    };
    for x in [0.3, 1.0, 2.5] {
        let expected = 0.5 + simpson(0.0, x, 2000);
        assert!((normal_cdf(x) - expected).abs() < 1e-13, "x={x}");
    }
}

#[test]
fn log_normal_cdf_joins_smoothly() {
    // both sides of the switch to the tail expansion
    let (a, b) = (log_normal_cdf(-30.0 + 1e-9), log_normal_cdf(-30.0 - 1e-9));
    assert!((a - b).abs() < 1e-6);
    assert!(log_normal_cdf(-40.0).is_finite());
}

#[test]
fn brent_matches_bisection() {
    let f = |x: f64| x.cos() - x;
    let root = find_root_default(f, Bracket::new(f, 0.0, 1.0).unwrap()).unwrap();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((root - lo).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normal_cdf_is_symmetric(x in -8.0..8.0_f64) {
        prop_assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normal_cdf_is_monotone(x in -8.0..8.0_f64, dx in 1e-3..1.0_f64) {
        prop_assert!(normal_cdf(x + dx) >= normal_cdf(x));
    }

    #[test]
    fn log_add_exp_agrees_with_direct_sum(a in -50.0..50.0_f64, b in -50.0..50.0_f64) {
        let direct = (a.exp() + b.exp()).ln();
        prop_assert!((log_add_exp(a, b) - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn tridiagonal_residual_is_small(seed in 0u64..1000, n in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sub: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sup: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(2.1..3.0)).collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for i in 0..n {
            let mut r = diag[i] * x[i] - rhs[i];
            if i > 0 { r += sub[i - 1] * x[i - 1]; }
            if i + 1 < n { r += sup[i] * x[i + 1]; }
            prop_assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn rates_scale_with_noise(
        mu in 0.3..3.0_f64,
        frac in 0.1..0.9_f64,
        ratio in 0.1..0.9_f64,
        sigma in 0.2..2.0_f64,
        k in 0.1..10.0_f64,
    ) {
        let bound = ExpBoundary::lower(2.0 * ratio, mu * frac);
        let base = OuModel::new(mu, sigma, 2.0);
        let scaled = OuModel::new(mu, sigma * k, 2.0);
        let (a, b) = (rate_infinite(&base, &bound).unwrap(), rate_infinite(&scaled, &bound).unwrap());
        prop_assert!((b.rate * k * k - a.rate).abs() <= 1e-12 * a.rate);
        prop_assert_eq!(a.horizon, b.horizon);
    }

    #[test]
    fn hitting_time_grows_as_lower_curve_falls(
        mu in 0.3..3.0_f64,
        frac in 0.1..0.9_f64,
        v0 in 0.1..0.8_f64,
        dv in 0.01..0.1_f64,
    ) {
        let m = OuModel::new(mu, 1.0, 1.0);
        let near = solve_topt(&m, &ExpBoundary::lower(v0 + dv, mu * frac)).unwrap();
        let far = solve_topt(&m, &ExpBoundary::lower(v0, mu * frac)).unwrap();
        prop_assert!(far > near);
    }
}
