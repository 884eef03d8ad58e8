use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruinld_core::gbm_rates::{corr_gbm_rate, gbm_rate_finite, CorrGbmPair, GbmModel};
use ruinld_core::oracle::{
    action_quadrature, minimize_fixed_endpoints, minimize_free_time, minimize_two_path, minimize_two_path_free_time,
    ActionKind, DiscreteAction, Endpoint,
};
use ruinld_core::ou_rates::{drift_optimal_path, drift_rate, rate_infinite, OuModel};
use ruinld_core::two_ou::{meeting_paths, meeting_solution, TwoOuModel};
use ruinld_core::ExpBoundary;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn two_ou_rate_matches_joint_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..8 {
        let beta = rng.random_range(0.2..1.0);
        let m = TwoOuModel {
            alpha: beta * rng.random_range(1.2..3.0),
            beta,
            sigma: rng.random_range(0.3..1.5),
            b: rng.random_range(0.3..1.5),
            x0: rng.random_range(2.0..4.0),
            y0: rng.random_range(0.5..1.5),
        };
        let sol = meeting_solution(&m).unwrap();
        let kind = ActionKind::TwoOu { alpha: m.alpha, beta: m.beta, sigma: m.sigma, b: m.b };
        let res = minimize_two_path(&kind, sol.meet_time, 2000, m.x0, m.y0).unwrap();
        assert!(rel(res.value, sol.rate) < 1e-4, "{} vs {}", res.value, sol.rate);
        let (x, _) = meeting_paths(&m, 2000).unwrap();
        assert!(rel(res.meet, x.last().unwrap()) < 1e-4);
    }
}

#[test]
fn two_ou_free_time_finds_meeting_time() {
    let m = TwoOuModel { alpha: 1.0, beta: 0.5, sigma: 1.0, b: 0.6, x0: 3.0, y0: 1.0 };
    let sol = meeting_solution(&m).unwrap();
    let kind = ActionKind::TwoOu { alpha: m.alpha, beta: m.beta, sigma: m.sigma, b: m.b };
    let res = minimize_two_path_free_time(&kind, m.x0, m.y0, (0.05, 5.0), 50, 1000).unwrap();
    assert!((res.horizon - sol.meet_time).abs() < 1e-3);
}

#[test]
fn correlated_gbm_rate_matches_joint_minimum() {
    let pair = CorrGbmPair { alpha: 1.2, beta: 0.4, sigma: 0.5, b: 0.3, rho: -0.3, x0: 3.0, y0: 1.0 };
    let sol = corr_gbm_rate(&pair).unwrap();
    let kind = ActionKind::CorrGbm { alpha: pair.alpha, beta: pair.beta, sigma: pair.sigma, b: pair.b, rho: pair.rho };
    let res = minimize_two_path_free_time(&kind, pair.x0, pair.y0, (0.1, 6.0), 60, 200).unwrap();
    assert!(rel(res.value, sol.rate) < 1e-9, "{} vs {}", res.value, sol.rate);
    assert!((res.horizon - sol.horizon).abs() < 1e-3);
}

#[test]
fn gbm_finite_rate_matches_log_space_minimum() {
    let model = GbmModel::new(1.0, 0.5, 1.0);
    let bound = ExpBoundary::upper(1.3, 1.1);
    for horizon in [0.5, 1.0, 2.0] {
        let sol = gbm_rate_finite(&model, &bound, horizon).unwrap();
        let action = DiscreteAction {
            horizon,
            n: 100,
            kind: ActionKind::GbmLog { mu: model.mu, sigma: model.sigma },
            left: model.x0,
            right: Endpoint::FreeOnCurve(bound),
        };
        let (_, value) = minimize_fixed_endpoints(&action).unwrap();
        assert!(rel(value, sol.rate) < 1e-10, "T={horizon}");
    }
}

#[test]
fn drift_rate_matches_free_time_minimum() {
    let model = OuModel::new(1.0, 0.8, 1.0).with_drift(0.4);
    let bound = ExpBoundary::upper(2.0, 1.4);
    let sol = drift_rate(&model, &bound).unwrap();
    let kind = ActionKind::OuLinear { mu: model.mu, r: model.r, sigma: model.sigma };
    let res = minimize_free_time(&kind, model.x0, &bound, (0.05, 4.0), 60, 2000).unwrap();
    assert!((res.t_star - sol.horizon).abs() < 1e-3);
    assert!(rel(res.value, sol.rate) < 1e-4);
    let q = action_quadrature(&drift_optimal_path(&model, &bound, 4000).unwrap(), &kind).unwrap();
    assert!(rel(q, sol.rate) < 1e-5);
}

#[test]
fn upper_infinite_rate_matches_free_time_minimum() {
    let model = OuModel::new(0.8, 1.2, 1.0);
    let bound = ExpBoundary::upper(2.5, 1.5);
    let sol = rate_infinite(&model, &bound).unwrap();
    let kind = ActionKind::OuLinear { mu: model.mu, r: 0.0, sigma: model.sigma };
    let res = minimize_free_time(&kind, model.x0, &bound, (0.05, 5.0), 60, 2000).unwrap();
    assert!((res.t_star - sol.horizon).abs() < 1e-3);
    assert!(rel(res.value, sol.rate) < 1e-4);
    assert!(res.respects_boundary);
}
