//! Data behind the reference figures, as long-format `curve,x,y` tables.

use ruinld_core::gbm_rates::{
    corr_gbm_rate, gbm_exact_hit_prob, gbm_optimal_path, gbm_rate_finite, CorrGbmPair, GbmModel, Horizon,
};
use ruinld_core::mc::{
    extract_extreme_path, simulate_corr_gbm, simulate_gbm, simulate_ou, time_change_forward, transformed_boundaries,
    HitProblem, SimConfig, TimeChange,
};
use ruinld_core::ou_rates::{
    j_star, optimal_path_fixed_time, optimal_path_infinite, rate_finite, rate_infinite, solve_topt, OuModel,
};
use ruinld_core::{ExpBoundary, SampledPath};

use crate::output::Table;
use crate::CliError;

type Figure = fn() -> Result<Table, CliError>;

/// `(name, alias, generator, description)`.
pub const FIGURES: [(&str, &str, Figure, &str); 17] = [
    ("fig1", "rate-curve", fig1, "J*(t) and I(t) for the lower curve"),
    ("fig2", "crossing-cases", fig2, "fixed-time paths for t = 1, 2, 3 against the lower curve"),
    ("fig3", "hitting-times", fig3, "fixed-time paths for t from 0.25 to 1.5"),
    ("fig4", "ou-band", fig4, "simulated OU path between a lower and an upper curve"),
    ("fig5", "ou-lower-path", fig5, "simulated OU path, lower curve and optimal path"),
    ("fig6", "ou-hitting-times", fig6, "optimal hitting times of both curves against x0"),
    ("fig7", "ou-rates", fig7, "infinite-horizon rates of both curves against x0"),
    ("fig8", "gbm-extreme-path", fig8, "typical and extreme GBM paths with the optimal path"),
    ("fig9", "gbm-pair", fig9, "two independent GBM paths with their optimal meeting paths"),
    ("fig10", "time-change", fig10, "OU band problem after the time change"),
    ("fig11", "gbm-scaled-log-prob", fig11, "-sigma^2 log p_T against the low-noise limit"),
    ("fig12", "gbm-prob-alpha", fig12, "p_T against T for several alpha"),
    ("fig13", "gbm-prob-sigma", fig13, "p_T against T for several sigma"),
    ("fig14", "gbm-prob-u0", fig14, "p_T against T for several u0"),
    ("fig15", "gbm-log-prob-alpha", fig15, "-log p_T and the rate for several alpha"),
    ("fig16", "gbm-log-prob-u0", fig16, "-log p_T and the rate for several u0"),
    ("fig17", "gbm-log-prob-sigma", fig17, "-log p_T and the rate for several sigma"),
];

pub fn lookup(name: &str) -> Option<Figure> {
    FIGURES.iter().find(|f| f.0 == name || f.1 == name).map(|f| f.2)
}

pub fn listing() -> Table {
    let mut t = Table::new(vec!["name", "alias", "description"]);
    for (name, alias, _, desc) in FIGURES {
        t.push(vec![name.into(), alias.into(), desc.into()]);
    }
    t
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

fn curves() -> Table {
    Table::new(vec!["curve", "x", "y"])
}

fn push_fn(table: &mut Table, curve: &str, xs: &[f64], f: impl Fn(f64) -> f64) {
    for &x in xs {
        table.push(vec![curve.into(), x.into(), f(x).into()]);
    }
}

fn push_try(table: &mut Table, curve: &str, xs: &[f64], f: impl Fn(f64) -> ruinld_core::Result<f64>) -> Result<(), CliError> {
    for &x in xs {
        table.push(vec![curve.into(), x.into(), f(x)?.into()]);
    }
    Ok(())
}

fn push_boundary(table: &mut Table, curve: &str, bound: &ExpBoundary, times: &[f64]) {
    push_fn(table, curve, times, |t| bound.value(t));
}

fn fig1() -> Result<Table, CliError> {
    let model = OuModel::new(2.5, 1.0, 4.0);
    let bound = ExpBoundary::lower(1.0, 1.0);
    let ts = grid(0.05, 1.5, 145);
    let mut t = curves();
    push_fn(&mut t, "J*", &ts, |s| j_star(&model, &bound, s));
    push_try(&mut t, "I", &ts, |s| rate_finite(&model, &bound, s).map(|r| r.rate))?;
    Ok(t)
}

fn fixed_time_family(model: OuModel, bound: ExpBoundary, times: &[f64]) -> Result<Table, CliError> {
    let mut t = curves();
    let last = times.iter().copied().fold(0.0, f64::max);
    push_boundary(&mut t, "V", &bound, &grid(0.0, last, 200));
    for &end in times {
        let path = optimal_path_fixed_time(&model, &bound, end, 200)?;
        t.push_curve(&format!("x t={end}"), &path);
    }
    Ok(t)
}

fn fig2() -> Result<Table, CliError> {
    fixed_time_family(OuModel::new(1.0, 1.0, 4.0), ExpBoundary::lower(0.5, 0.5), &[1.0, 2.0, 3.0])
}

fn fig3() -> Result<Table, CliError> {
    let times = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5];
    fixed_time_family(OuModel::new(1.0, 1.0, 2.0), ExpBoundary::lower(0.5, 0.6), &times)
}

fn fig4() -> Result<Table, CliError> {
    let model = OuModel::new(1.0, 1.0, 1.0);
    let path = simulate_ou(&model, &SimConfig::new(1.5, 1, 4).with_step(1e-3))?;
    let mut t = curves();
    t.push_curve("x", &path);
    push_boundary(&mut t, "lower", &ExpBoundary::lower(0.5, 0.5), &path.times);
    push_boundary(&mut t, "upper", &ExpBoundary::upper(2.0, 1.3), &path.times);
    Ok(t)
}

fn fig5() -> Result<Table, CliError> {
    let model = OuModel::new(1.0, 1.0, 2.0);
    let bound = ExpBoundary::lower(1.0, 0.8);
    let path = simulate_ou(&model, &SimConfig::new(1.5, 1, 5).with_step(1e-3))?;
    let mut t = curves();
    t.push_curve("x", &path);
    push_boundary(&mut t, "lower", &bound, &path.times);
    t.push_curve("optimal", &optimal_path_infinite(&model, &bound, 200)?);
    Ok(t)
}

fn both_curves(f: impl Fn(&OuModel, &ExpBoundary) -> ruinld_core::Result<f64>) -> Result<Table, CliError> {
    let upper = ExpBoundary::upper(2.0, 1.3);
    let lower = ExpBoundary::lower(0.5, 0.5);
    let xs = grid(0.52, 1.98, 73);
    let mut t = curves();
    push_try(&mut t, "upper", &xs, |x0| f(&OuModel::new(1.0, 1.0, x0), &upper))?;
    push_try(&mut t, "lower", &xs, |x0| f(&OuModel::new(1.0, 1.0, x0), &lower))?;
    Ok(t)
}

fn fig6() -> Result<Table, CliError> {
    both_curves(solve_topt)
}

fn fig7() -> Result<Table, CliError> {
    both_curves(|m, b| rate_infinite(m, b).map(|r| r.rate))
}

fn fig8() -> Result<Table, CliError> {
    let model = GbmModel::new(0.97, 0.15, 1.0);
    let bound = ExpBoundary::upper(2.0, 1.0);
    let optimal = gbm_optimal_path(&model, &bound, 400)?;
    let cfg = SimConfig::new(1.2 * optimal.horizon(), 100_000, 8).with_step(1e-2);
    let typical = simulate_gbm(&model, &cfg)?;
    let extreme = extract_extreme_path(&HitProblem::Gbm { model, bound }, &cfg)?;
    let mut t = curves();
    push_boundary(&mut t, "boundary", &bound, &grid(0.0, cfg.horizon, 400));
    t.push_curve("optimal", &optimal);
    t.push_curve("typical", &typical);
    t.push_curve("extreme", &extreme);
    Ok(t)
}

fn fig9() -> Result<Table, CliError> {
    let pair = CorrGbmPair { alpha: 1.0, beta: 0.5, sigma: 0.3, b: 0.2, rho: 0.0, x0: 2.0, y0: 1.0 };
    let (x, y) = simulate_corr_gbm(&pair, &SimConfig::new(3.0, 1, 9).with_step(1e-2))?;
    let sol = corr_gbm_rate(&pair)?;
    let mut t = curves();
    t.push_curve("x", &x);
    t.push_curve("y", &y);
    t.push_curve("x optimal", &SampledPath::from_fn(sol.horizon, 200, |s| pair.x0 * (sol.c1 * s).exp()));
    t.push_curve("y optimal", &SampledPath::from_fn(sol.horizon, 200, |s| pair.y0 * (sol.c2 * s).exp()));
    Ok(t)
}

fn fig10() -> Result<Table, CliError> {
    let model = OuModel::new(1.0, 1.0, 1.0);
    let lower = ExpBoundary::lower(0.5, 0.5);
    let upper = ExpBoundary::upper(2.0, 1.3);
    let tc = TimeChange::new(model.mu, model.sigma)?;
    let path = simulate_ou(&model, &SimConfig::new(1.5, 1, 10).with_step(1e-3))?;
    let taus: Vec<f64> = path.times.iter().map(|&s| time_change_forward(&tc, s)).collect();
    let (lo, hi) = transformed_boundaries(&model, &lower, &upper, &taus)?;
    let mut t = curves();
    for ((tau, (s, x)), (l, h)) in taus.iter().zip(path.iter()).zip(lo.iter().zip(&hi)) {
        t.push(vec!["brownian".into(), (*tau).into(), (x * (-model.mu * s).exp()).into()]);
        t.push(vec!["lower".into(), (*tau).into(), (*l).into()]);
        t.push(vec!["upper".into(), (*tau).into(), (*h).into()]);
    }
    Ok(t)
}

fn gbm_case(mu: f64, sigma: f64, x0: f64, u0: f64, alpha: f64) -> (GbmModel, ExpBoundary) {
    (GbmModel::new(mu, sigma, x0), ExpBoundary::upper(u0, alpha))
}

fn log_prob(model: &GbmModel, bound: &ExpBoundary, t: f64) -> ruinld_core::Result<f64> {
    gbm_exact_hit_prob(model, bound, Horizon::Finite(t)).map(|p| p.log_prob)
}

fn horizons() -> Vec<f64> {
    grid(0.05, 10.0, 199)
}

fn fig11() -> Result<Table, CliError> {
    let ts = horizons();
    let mut t = curves();
    for sigma in [0.05, 0.1, 0.2, 0.5] {
        let (m, b) = gbm_case(1.0, sigma, 1.0, 1.3, 1.1);
        push_try(&mut t, &format!("sigma={sigma}"), &ts, |s| log_prob(&m, &b, s).map(|l| -sigma * sigma * l))?;
    }
    let (m, b) = gbm_case(1.0, 1.0, 1.0, 1.3, 1.1);
    push_try(&mut t, "limit", &ts, |s| gbm_rate_finite(&m, &b, s).map(|r| r.rate))?;
    Ok(t)
}

fn prob_sweep(label: &str, cases: &[(f64, GbmModel, ExpBoundary)]) -> Result<Table, CliError> {
    let ts = horizons();
    let mut t = curves();
    for (v, m, b) in cases {
        push_try(&mut t, &format!("{label}={v}"), &ts, |s| log_prob(m, b, s).map(f64::exp))?;
    }
    Ok(t)
}

const SWEEP: [f64; 5] = [1.3, 2.0, 2.5, 3.0, 3.5];

fn fig12() -> Result<Table, CliError> {
    let cases: Vec<_> = [1.1, 2.0, 2.5, 3.0, 3.5]
        .iter()
        .map(|&a| {
            let (m, b) = gbm_case(1.0, 0.5, 1.0, 1.3, a);
            (a, m, b)
        })
        .collect();
    prob_sweep("alpha", &cases)
}

fn fig13() -> Result<Table, CliError> {
    let cases: Vec<_> = [0.2, 0.5, 1.0, 2.0, 3.0]
        .iter()
        .map(|&s| {
            let (m, b) = gbm_case(1.0, s, 1.0, 1.3, 1.1);
            (s, m, b)
        })
        .collect();
    prob_sweep("sigma", &cases)
}

fn fig14() -> Result<Table, CliError> {
    let cases: Vec<_> = SWEEP
        .iter()
        .map(|&u| {
            let (m, b) = gbm_case(1.0, 0.5, 1.0, u, 1.1);
            (u, m, b)
        })
        .collect();
    prob_sweep("u0", &cases)
}

/// `-log p_T` and the finite-horizon rate for each labelled case.
fn log_prob_sweep(cases: &[(String, GbmModel, ExpBoundary)]) -> Result<Table, CliError> {
    let ts = horizons();
    let mut t = curves();
    for (label, m, b) in cases {
        push_try(&mut t, label, &ts, |s| log_prob(m, b, s).map(|l| -l))?;
        push_try(&mut t, &format!("rate {label}"), &ts, |s| gbm_rate_finite(m, b, s).map(|r| r.rate))?;
    }
    Ok(t)
}

fn fig15() -> Result<Table, CliError> {
    let mut cases = Vec::new();
    for sigma in [0.05, 0.5] {
        for alpha in [1.1, 2.0, 2.5, 3.0, 3.5] {
            let (m, b) = gbm_case(1.0, sigma, 1.0, 1.3, alpha);
            cases.push((format!("sigma={sigma} alpha={alpha}"), m, b));
        }
    }
    log_prob_sweep(&cases)
}

fn fig16() -> Result<Table, CliError> {
    let mut cases = Vec::new();
    for sigma in [0.05, 0.5] {
        for u0 in SWEEP {
            let (m, b) = gbm_case(1.0, sigma, 1.0, u0, 1.3);
            cases.push((format!("sigma={sigma} u0={u0}"), m, b));
        }
    }
    log_prob_sweep(&cases)
}

fn fig17() -> Result<Table, CliError> {
    let cases: Vec<_> = [0.05, 0.1, 0.2, 0.5]
        .iter()
        .map(|&s| {
            let (m, b) = gbm_case(1.0, s, 1.0, 1.3, 1.1);
            (format!("sigma={s}"), m, b)
        })
        .collect();
    log_prob_sweep(&cases)
}
