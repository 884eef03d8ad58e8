//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p ruinld-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruinld_core::gbm_rates::{
    corr_gbm_exact, corr_gbm_rate, gbm_exact_hit_prob, gbm_optimal_path, gbm_optimal_path_finite, gbm_rate_finite,
    gbm_rate_infinite, CorrGbmPair, GbmModel, Horizon,
};
use ruinld_core::mc::{
    estimate_hit_prob, simulate_corr_gbm, simulate_ou, time_change_forward, time_change_inverse, two_boundary_survival,
    HitProblem, Monitor, SimConfig, TimeChange,
};
use ruinld_core::oracle::{
    minimize_fixed_endpoints, minimize_free_time, minimize_two_path, minimize_two_path_free_time,
    perturbation_certificate, perturbation_certificate_pair, ActionKind, DiscreteAction, Endpoint,
};
use ruinld_core::ou_rates::{
    classify_crossing, drift_optimal_path, drift_rate, drift_solve_t, j_star, optimal_path_fixed_time,
    optimal_path_infinite, rate_finite, rate_infinite, respects_boundary, solve_topt, solve_topt_lower,
    solve_topt_upper, OuModel,
};
use ruinld_core::two_ou::{meeting_paths, meeting_solution, TwoOuModel};
use ruinld_core::{ExpBoundary, SampledPath, Side};

type Outcome = Result<String, String>;

fn pass_if(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Outcome {
    let a = solve_topt_lower(&OuModel::new(2.5, 1.0, 4.0), &ExpBoundary::lower(1.0, 1.0)).map_err(|e| e.to_string())?;
    let b = solve_topt_lower(&OuModel::new(1.0, 1.0, 2.0), &ExpBoundary::lower(1.0, 0.8)).map_err(|e| e.to_string())?;
    let c = classify_crossing(&OuModel::new(1.0, 1.0, 4.0), &ExpBoundary::lower(0.5, 0.5), 2.0)
        .map_err(|e| e.to_string())?;
    let ok = (a - 0.529).abs() <= 1e-3
        && (b - 1.0621).abs() <= 1e-3
        && (c.t1 - 1.386).abs() <= 0.01
        && (c.t2 - 2.29).abs() <= 0.01;
    pass_if(ok, format!("t_opt={a:.5}, t_opt={b:.5}, t1={:.4}, t2={:.4}", c.t1, c.t2))
}

#[derive(Debug, Clone, Copy)]
struct OuCase {
    model: OuModel,
    bound: ExpBoundary,
}

fn random_lower(rng: &mut ChaCha8Rng) -> OuCase {
    let mu = rng.random_range(0.5..3.0);
    let x0 = rng.random_range(1.0..5.0);
    OuCase {
        model: OuModel::new(mu, rng.random_range(0.5..2.0), x0),
        bound: ExpBoundary::lower(x0 * rng.random_range(0.1..0.8), mu * rng.random_range(0.1..0.9)),
    }
}

fn random_upper(rng: &mut ChaCha8Rng) -> OuCase {
    let mu = rng.random_range(0.5..2.0);
    let x0 = rng.random_range(0.5..2.0);
    OuCase {
        model: OuModel::new(mu, rng.random_range(0.5..2.0), x0),
        bound: ExpBoundary::upper(x0 * rng.random_range(1.2..3.0), mu * rng.random_range(1.1..2.0)),
    }
}

fn ou_kind(m: &OuModel) -> ActionKind {
    ActionKind::OuLinear { mu: m.mu, r: m.r, sigma: m.sigma }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_err, mut worst_order) = (0.0_f64, f64::INFINITY);
    for k in 0..20 {
        let case = if k % 2 == 0 { random_lower(&mut rng) } else { random_upper(&mut rng) };
        let t_opt = solve_topt(&case.model, &case.bound).map_err(|e| e.to_string())?;
        let t = t_opt * rng.random_range(0.3..1.0);
        let exact = j_star(&case.model, &case.bound, t);
        let run = |n| {
            let action = DiscreteAction {
                horizon: t,
                n,
                kind: ou_kind(&case.model),
                left: case.model.x0,
                right: Endpoint::FreeOnCurve(case.bound),
            };
            minimize_fixed_endpoints(&action).map(|r| r.1).map_err(|e| e.to_string())
        };
        let (coarse, fine) = (run(1000)?, run(2000)?);
        let err = rel(fine, exact);
        let order = ((coarse - exact) / (fine - exact)).abs().log2();
        worst_err = worst_err.max(err);
        worst_order = worst_order.min(order);
    }
    pass_if(
        worst_err <= 1e-3 && worst_order >= 1.8,
        format!("20 sets, max rel err {worst_err:.2e} at n=2000, min order {worst_order:.3}"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for k in 0..10 {
        let (case, expected) = match k % 3 {
            0 => {
                let c = random_lower(&mut rng);
                (c, solve_topt_lower(&c.model, &c.bound))
            }
            1 => {
                let c = random_upper(&mut rng);
                (c, solve_topt_upper(&c.model, &c.bound))
            }
            _ => {
                let mut c = random_upper(&mut rng);
                let cap = c.bound.level0 * (c.bound.exponent - c.model.mu);
                c.model = c.model.with_drift(cap * rng.random_range(0.1..0.8));
                (c, drift_solve_t(&c.model, &c.bound))
            }
        };
        let expected = expected.map_err(|e| e.to_string())?;
        let res = minimize_free_time(&ou_kind(&case.model), case.model.x0, &case.bound, (0.02, 6.0), 60, 1000)
            .map_err(|e| e.to_string())?;
        worst = worst.max((res.t_star - expected).abs());
    }
    pass_if(worst <= 1e-3, format!("10 sets, max |T* - T| = {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let model = GbmModel::new(1.0, 0.5, 1.0);
    let bound = ExpBoundary::upper(1.3, 1.1);
    let limit = 2.0 * (1.1 - 1.0) * 1.3_f64.ln() / 0.25;
    let scaled = |eps: f64| -> Result<f64, String> {
        let p = gbm_exact_hit_prob(&model.scaled(eps), &bound, Horizon::Infinite).map_err(|e| e.to_string())?;
        Ok(-eps * p.log_prob)
    };
    let seq = [scaled(1e-2)?, scaled(1e-3)?, scaled(1e-4)?];
    let d1 = (seq[0] - seq[1]).abs();
    let d2 = (seq[1] - seq[2]).abs();
    let shrink = d1 / d2;
    let towards = (seq[2] - limit).abs() < (seq[1] - limit).abs() && (seq[1] - limit).abs() < (seq[0] - limit).abs();
    // the gap is linear in eps, so one extrapolation step removes it
    let at = scaled(1e-6)?;
    let extrapolated = 2.0 * at - scaled(2e-6)?;
    let gap = (extrapolated - limit).abs();
    pass_if(
        shrink >= 5.0 && towards && gap <= 1e-9,
        format!(
            "limit {limit:.10}, differences shrink x{shrink:.2}, extrapolated gap {gap:.1e} (raw gap at 1e-6: {:.2e})",
            (at - limit).abs()
        ),
    )
}

fn criterion_5() -> Outcome {
    let model = GbmModel::new(1.0, 0.5, 1.0);
    let bound = ExpBoundary::upper(1.3, 1.1);
    let problem = HitProblem::Gbm { model, bound };
    let exact = gbm_exact_hit_prob(&model, &bound, Horizon::Finite(5.0)).map_err(|e| e.to_string())?.prob;
    let cfg = SimConfig::new(5.0, 100_000, 5).with_step(1e-3);
    let bridged = estimate_hit_prob(&problem, &cfg.with_monitor(Monitor::Bridge)).map_err(|e| e.to_string())?;
    let grid = estimate_hit_prob(&problem, &cfg).map_err(|e| e.to_string())?;
    let z = bridged.z_score(exact);
    pass_if(
        z.abs() <= 3.0,
        format!(
            "exact {exact:.5}, bridge MC {:.5} (z={z:.2}); grid-only MC {:.5} (z={:.2})",
            bridged.p_hat,
            grid.p_hat,
            grid.z_score(exact)
        ),
    )
}

fn criterion_6() -> Outcome {
    let model = TwoOuModel { alpha: 1.2, beta: 0.4, sigma: 0.8, b: 0.5, x0: 3.0, y0: 1.0 };
    let sol = meeting_solution(&model).map_err(|e| e.to_string())?;
    let residual = sol.max_residual();

    let thin = TwoOuModel { b: 1e-6, ..model };
    let single = rate_infinite(&OuModel::new(thin.alpha, thin.sigma, thin.x0), &ExpBoundary::lower(thin.y0, thin.beta))
        .map_err(|e| e.to_string())?;
    let limit_err = rel(meeting_solution(&thin).map_err(|e| e.to_string())?.rate, single.rate);

    let kind = ActionKind::TwoOu { alpha: model.alpha, beta: model.beta, sigma: model.sigma, b: model.b };
    let fixed = minimize_two_path(&kind, sol.meet_time, 2000, model.x0, model.y0).map_err(|e| e.to_string())?;
    let free = minimize_two_path_free_time(&kind, model.x0, model.y0, (0.05, 6.0), 60, 2000).map_err(|e| e.to_string())?;
    let oracle_err = rel(fixed.value, sol.rate).max(rel(free.value, sol.rate));
    pass_if(
        residual <= 1e-9 && limit_err <= 1e-3 && oracle_err <= 1e-3,
        format!(
            "max residual {residual:.1e}, b->0 rel err {limit_err:.1e}, oracle rel err {oracle_err:.1e} (T*={:.4} vs {:.4})",
            free.horizon, sol.meet_time
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for alpha in [0.8, 1.0, 1.5] {
        for sigma in [0.2, 0.4, 0.7] {
            for rho in [-0.6, 0.0, 0.7] {
                let pair = CorrGbmPair { alpha, beta: 0.3, sigma, b: 0.35, rho, x0: 2.5, y0: 1.0 };
                let rate = corr_gbm_rate(&pair).map_err(|e| e.to_string())?.rate;
                let eps = 1e-12;
                let limit = -eps * corr_gbm_exact(&pair, eps).map_err(|e| e.to_string())?.log_prob;
                worst = worst.max(rel(limit, rate));
                count += 1;
            }
        }
    }
    let pair = CorrGbmPair { alpha: 1.0, beta: 0.5, sigma: 0.3, b: 0.2, rho: 0.5, x0: 2.0, y0: 1.0 };
    let exact = corr_gbm_exact(&pair, 1.0).map_err(|e| e.to_string())?.prob;
    let cfg = SimConfig::new(6.0, 100_000, 7).with_step(1e-3).with_monitor(Monitor::Bridge);
    let est = estimate_hit_prob(&HitProblem::CorrGbmMeeting { pair }, &cfg).map_err(|e| e.to_string())?;
    let z = est.z_score(exact);
    pass_if(
        worst <= 1e-9 && z.abs() <= 3.0,
        format!(
            "{count}-point grid max rel gap {worst:.1e}; eps=1 exact {exact:.3e}, MC {:.3e} ({} hits, z={z:.2})",
            est.p_hat, est.n_hits
        ),
    )
}

fn criterion_8() -> Outcome {
    let tc = TimeChange::new(0.8, 1.3).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let t = 0.05 * k as f64;
        let back = time_change_inverse(&tc, time_change_forward(&tc, t)).map_err(|e| e.to_string())?;
        worst = worst.max((back - t).abs());
    }

    let (mu, sigma, x0, horizon) = (0.8, 1.0, 1.0, 1.5);
    let model = OuModel::new(mu, sigma, x0);
    let lower = ExpBoundary::lower(0.3, mu);
    let upper = ExpBoundary::upper(2.0, mu);
    let tau = time_change_forward(&TimeChange::new(mu, sigma).map_err(|e| e.to_string())?, horizon);
    let exit = 1.0 - two_boundary_survival(upper.level0 - x0, x0 - lower.level0, tau, 1e-14).map_err(|e| e.to_string())?;
    let cfg = SimConfig::new(horizon, 100_000, 8).with_step(1e-3).with_monitor(Monitor::Bridge);
    let est = estimate_hit_prob(&HitProblem::OuCorridor { model, lower, upper }, &cfg).map_err(|e| e.to_string())?;
    let z = est.z_score(exit);
    pass_if(
        worst <= 1e-12 && z.abs() <= 3.0,
        format!("round trip max err {worst:.1e}; series exit prob {exit:.5}, OU MC {:.5} (z={z:.2})", est.p_hat),
    )
}

fn scaling_gaps(k: f64) -> Result<f64, String> {
    let mut worst = 0.0_f64;
    let mut compare = |base: (f64, f64), scaled: (f64, f64)| {
        worst = worst.max(rel(scaled.0 * k * k, base.0)).max(rel(scaled.1, base.1));
    };
    let lo = OuCase { model: OuModel::new(1.0, 1.0, 2.0), bound: ExpBoundary::lower(1.0, 0.8) };
    let up = OuCase { model: OuModel::new(1.0, 0.7, 1.0), bound: ExpBoundary::upper(2.0, 1.3) };
    for c in [lo, up] {
        let s = OuModel { sigma: c.model.sigma * k, ..c.model };
        let pick = |m: &OuModel| rate_infinite(m, &c.bound).map(|r| (r.rate, r.horizon));
        compare(pick(&c.model).map_err(|e| e.to_string())?, pick(&s).map_err(|e| e.to_string())?);
        let fin = |m: &OuModel| rate_finite(m, &c.bound, 0.5).map(|r| (r.rate, r.horizon));
        compare(fin(&c.model).map_err(|e| e.to_string())?, fin(&s).map_err(|e| e.to_string())?);
    }
    let drift = OuModel::new(1.0, 0.7, 1.0).with_drift(0.3);
    let db = ExpBoundary::upper(2.0, 1.3);
    let d = |m: &OuModel| drift_rate(m, &db).map(|r| (r.rate, r.horizon));
    compare(
        d(&drift).map_err(|e| e.to_string())?,
        d(&OuModel { sigma: 0.7 * k, ..drift }).map_err(|e| e.to_string())?,
    );
    let two = TwoOuModel { alpha: 1.2, beta: 0.4, sigma: 0.8, b: 0.5, x0: 3.0, y0: 1.0 };
    let m = |t: &TwoOuModel| meeting_solution(t).map(|s| (s.rate, s.meet_time));
    compare(
        m(&two).map_err(|e| e.to_string())?,
        m(&TwoOuModel { sigma: two.sigma * k, b: two.b * k, ..two }).map_err(|e| e.to_string())?,
    );
    let g = GbmModel::new(1.0, 0.5, 1.0);
    let gb = ExpBoundary::upper(1.3, 1.1);
    let gs = GbmModel { sigma: 0.5 * k, ..g };
    for h in [0.5, 10.0] {
        let f = |m: &GbmModel| gbm_rate_finite(m, &gb, h).map(|r| (r.rate, r.horizon));
        compare(f(&g).map_err(|e| e.to_string())?, f(&gs).map_err(|e| e.to_string())?);
    }
    let inf = |m: &GbmModel| gbm_rate_infinite(m, &gb).map(|r| (r.rate, r.horizon));
    compare(inf(&g).map_err(|e| e.to_string())?, inf(&gs).map_err(|e| e.to_string())?);
    let p = CorrGbmPair { alpha: 1.0, beta: 0.5, sigma: 0.3, b: 0.2, rho: 0.5, x0: 2.0, y0: 1.0 };
    let c = |q: &CorrGbmPair| corr_gbm_rate(q).map(|r| (r.rate, r.horizon));
    compare(
        c(&p).map_err(|e| e.to_string())?,
        c(&CorrGbmPair { sigma: 0.3 * k, b: 0.2 * k, ..p }).map_err(|e| e.to_string())?,
    );
    Ok(worst)
}

/// Relative error of the path ends against `(start, end)`.
fn end_gap(path: &SampledPath, start: f64, end: f64) -> f64 {
    rel(path.first().unwrap_or(f64::NAN), start).max(rel(path.last().unwrap_or(f64::NAN), end))
}

/// Strictly on the start side of `bound` everywhere before the last sample.
fn strictly_inside(path: &SampledPath, bound: &ExpBoundary) -> bool {
    let n = path.len();
    path.iter().take(n - 1).all(|(t, x)| match bound.side {
        Side::Lower => x > bound.value(t),
        Side::Upper => x < bound.value(t),
    })
}

fn criterion_9() -> Outcome {
    let err = |e: ruinld_core::Error| e.to_string();
    let scaling = scaling_gaps(3.0)?.max(scaling_gaps(0.1)?);

    let n = 2000;
    let mut bc = 0.0_f64;
    let mut inside = true;
    let mut certified = 0;
    let mut total = 0;
    let mut certify = |cert: ruinld_core::oracle::Certificate| {
        total += 1;
        if cert.all_worse && cert.n_perturbations == 50 {
            certified += 1;
        }
    };

    let lo = OuCase { model: OuModel::new(1.0, 1.0, 2.0), bound: ExpBoundary::lower(1.0, 0.8) };
    let up = OuCase { model: OuModel::new(1.0, 0.7, 1.0), bound: ExpBoundary::upper(2.0, 1.3) };
    for c in [lo, up] {
        let t = solve_topt(&c.model, &c.bound).map_err(err)?;
        for path in [
            optimal_path_infinite(&c.model, &c.bound, n).map_err(err)?,
            optimal_path_fixed_time(&c.model, &c.bound, 0.6 * t, n).map_err(err)?,
        ] {
            bc = bc.max(end_gap(&path, c.model.x0, c.bound.value(path.horizon())));
            inside &= strictly_inside(&path, &c.bound) && respects_boundary(&path, &c.bound);
            certify(perturbation_certificate(&path, &ou_kind(&c.model), 50, 11).map_err(err)?);
        }
    }

    let drift = OuModel::new(1.0, 0.7, 1.0).with_drift(0.3);
    let db = ExpBoundary::upper(2.0, 1.3);
    let path = drift_optimal_path(&drift, &db, n).map_err(err)?;
    bc = bc.max(end_gap(&path, drift.x0, db.value(path.horizon())));
    inside &= strictly_inside(&path, &db);
    certify(perturbation_certificate(&path, &ou_kind(&drift), 50, 12).map_err(err)?);

    let g = GbmModel::new(1.0, 0.5, 1.0);
    let gb = ExpBoundary::upper(1.3, 1.1);
    let gkind = ActionKind::GbmLog { mu: g.mu, sigma: g.sigma };
    for path in [gbm_optimal_path(&g, &gb, n).map_err(err)?, gbm_optimal_path_finite(&g, &gb, 0.5, n).map_err(err)?] {
        bc = bc.max(end_gap(&path, g.x0, gb.value(path.horizon())));
        inside &= strictly_inside(&path, &gb);
        certify(perturbation_certificate(&path, &gkind, 50, 13).map_err(err)?);
    }

    let two = TwoOuModel { alpha: 1.2, beta: 0.4, sigma: 0.8, b: 0.5, x0: 3.0, y0: 1.0 };
    let (x, y) = meeting_paths(&two, n).map_err(err)?;
    let meet = x.last().unwrap_or(f64::NAN);
    bc = bc.max(end_gap(&x, two.x0, meet)).max(end_gap(&y, two.y0, meet));
    inside &= x.values.iter().zip(&y.values).take(n).all(|(a, b)| a > b);
    let tkind = ActionKind::TwoOu { alpha: two.alpha, beta: two.beta, sigma: two.sigma, b: two.b };
    certify(perturbation_certificate_pair(&x, &y, &tkind, 50, 14).map_err(err)?);

    let determinism = deterministic_across_threads().map_err(err)?;
    pass_if(
        scaling <= 1e-12 && bc <= 1e-10 && inside && certified == total && determinism,
        format!(
            "scaling gap {scaling:.1e}, end-condition gap {bc:.1e}, interior ok {inside}, certified {certified}/{total}, thread-count determinism {determinism}"
        ),
    )
}

fn deterministic_across_threads() -> ruinld_core::Result<bool> {
    let problem = HitProblem::Ou { model: OuModel::new(1.0, 1.0, 2.0), bound: ExpBoundary::lower(1.0, 0.8) };
    let cfg = SimConfig::new(1.0, 20_000, 99).with_step(1e-2);
    let pair = CorrGbmPair { alpha: 1.0, beta: 0.5, sigma: 0.3, b: 0.2, rho: 0.5, x0: 2.0, y0: 1.0 };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        pool.install(|| -> ruinld_core::Result<_> {
            Ok((
                estimate_hit_prob(&problem, &cfg)?,
                estimate_hit_prob(&problem, &cfg.with_monitor(Monitor::Bridge))?,
                simulate_ou(&OuModel::new(1.0, 1.0, 2.0), &cfg)?,
                simulate_corr_gbm(&pair, &cfg)?,
            ))
        })
    };
    let one = run(1)?;
    Ok([2, 4, 7].into_iter().map(run).all(|r| r.as_ref().ok() == Some(&one)))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("golden roots", criterion_1),
        ("OU oracle equivalence", criterion_2),
        ("free-time oracle", criterion_3),
        ("GBM exact vs large deviations", criterion_4),
        ("GBM Monte Carlo vs exact", criterion_5),
        ("two-OU closure", criterion_6),
        ("correlated GBM", criterion_7),
        ("time change", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
