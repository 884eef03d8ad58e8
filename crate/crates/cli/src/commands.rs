//! One function per subcommand. Each fills parameter defaults into the
//! `Params` it is given so that the echo reflects what was actually run.

use clap::ValueEnum;
use ruinld_core::gbm_rates::{
    corr_gbm_exact, corr_gbm_rate, gbm_exact_hit_prob, gbm_optimal_path, gbm_optimal_path_finite, gbm_rate_finite,
    gbm_rate_infinite, GbmRateSolution, Horizon, HitProbability,
};
use ruinld_core::mc::{
    estimate_hit_prob, extract_extreme_path, simulate_corr_gbm, simulate_gbm, simulate_ou, time_change_forward,
    two_boundary_survival, HitProblem, TimeChange,
};
use ruinld_core::oracle::{
    minimize_fixed_endpoints, minimize_free_time, minimize_two_path, minimize_two_path_free_time,
    perturbation_certificate, perturbation_certificate_pair, ActionKind, Certificate, DiscreteAction, Endpoint,
};
use ruinld_core::ou_rates::{
    classify_crossing, drift_optimal_path, drift_rate, drift_solve_t, j_star, optimal_path_fixed_time,
    optimal_path_infinite, rate_finite, rate_infinite, second_crossing, solve_topt, RateSolution,
};
use ruinld_core::two_ou::{meeting_paths, meeting_solution, solve_meeting_time};
use ruinld_core::{ExpBoundary, SampledPath};
use serde_json::{json, Map, Value};

use crate::output::{number, Artifact, Table};
use crate::params::Params;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    /// OU reaching v0·e^{βt} from above
    OuLower,
    /// OU reaching u0·e^{αt} from below
    OuUpper,
    /// OU with constant drift r reaching the upper curve
    OuDrift,
    /// OU leaving the band between the lower and upper curves
    OuCorridor,
    /// Two independent OU processes meeting
    TwoOu,
    /// GBM reaching u0·e^{αt}
    Gbm,
    /// Correlated GBM pair meeting
    CorrGbm,
    /// The OU corridor after the time change to Brownian motion
    TimeChanged,
}

impl Problem {
    fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
    }
}

fn unsupported(command: &str, problem: Problem) -> CliError {
    CliError::Usage(format!("{command} does not support {}", problem.name()))
}

fn document(command: &str, problem: Option<Problem>, params: &Params, body: Map<String, Value>) -> Artifact {
    let mut out = Map::new();
    out.insert("command".into(), command.into());
    if let Some(p) = problem {
        out.insert("problem".into(), p.name().into());
    }
    out.insert("params".into(), params.echo());
    out.extend(body);
    Artifact::Json(Value::Object(out))
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn ou_body(sol: &RateSolution) -> Map<String, Value> {
    obj(json!({
        "rate": number(sol.rate),
        "horizon": number(sol.horizon),
        "c1": number(sol.coeff_c1),
        "c2": number(sol.coeff_c2),
        "residuals": sol.residuals.iter().map(|(k, v)| (k.clone(), number(*v))).collect::<Map<_, _>>(),
    }))
}

fn gbm_body(sol: &GbmRateSolution) -> Map<String, Value> {
    obj(json!({
        "rate": number(sol.rate),
        "horizon": number(sol.horizon),
        "exponent_c": number(sol.exponent_c),
    }))
}

fn single_bound(problem: Problem, p: &Params) -> Result<ExpBoundary, CliError> {
    match problem {
        Problem::OuLower => p.lower(),
        _ => p.upper(),
    }
}

fn add_approximation(body: &mut Map<String, Value>, rate: f64, eps: f64) {
    body.insert("eps".into(), number(eps));
    body.insert("approx_log_prob".into(), number(-rate / eps));
    body.insert("approx_prob".into(), number((-rate / eps).exp()));
}

pub fn rate(problem: Problem, p: &mut Params) -> Result<Artifact, CliError> {
    let (mut body, rate) = match problem {
        Problem::OuLower | Problem::OuUpper => {
            let model = p.ou()?;
            let bound = single_bound(problem, p)?;
            let sol = match p.horizon {
                Some(h) => rate_finite(&model, &bound, h)?,
                None => rate_infinite(&model, &bound)?,
            };
            let mut body = ou_body(&sol);
            body.insert("t_opt".into(), number(solve_topt(&model, &bound)?));
            (body, sol.rate)
        }
        Problem::OuDrift => {
            let model = p.ou()?;
            let sol = drift_rate(&model, &p.upper()?)?;
            (ou_body(&sol), sol.rate)
        }
        Problem::TwoOu => {
            let sol = meeting_solution(&p.two_ou()?)?;
            let body = obj(json!({
                "rate": number(sol.rate),
                "horizon": number(sol.meet_time),
                "c1": number(sol.c1),
                "c2": number(sol.c2),
                "c3": number(sol.c3),
                "c4": number(sol.c4),
                "residuals": sol.residuals.iter().map(|(k, v)| (k.clone(), number(*v))).collect::<Map<_, _>>(),
            }));
            (body, sol.rate)
        }
        Problem::Gbm => {
            let (model, bound) = (p.gbm()?, p.upper()?);
            let sol = match p.horizon {
                Some(h) => gbm_rate_finite(&model, &bound, h)?,
                None => gbm_rate_infinite(&model, &bound)?,
            };
            let mut body = gbm_body(&sol);
            body.insert("t_min".into(), number(gbm_rate_infinite(&model, &bound)?.horizon));
            (body, sol.rate)
        }
        Problem::CorrGbm => {
            let sol = corr_gbm_rate(&p.pair()?)?;
            let body = obj(json!({
                "rate": number(sol.rate),
                "horizon": number(sol.horizon),
                "c1": number(sol.c1),
                "c2": number(sol.c2),
            }));
            (body, sol.rate)
        }
        Problem::OuCorridor | Problem::TimeChanged => return Err(unsupported("rate", problem)),
    };
    add_approximation(&mut body, rate, p.eps());
    Ok(document("rate", Some(problem), p, body))
}

pub fn hit_time(problem: Problem, p: &mut Params) -> Result<Artifact, CliError> {
    let t = match problem {
        Problem::OuLower | Problem::OuUpper => solve_topt(&p.ou()?, &single_bound(problem, p)?)?,
        Problem::OuDrift => drift_solve_t(&p.ou()?, &p.upper()?)?,
        Problem::TwoOu => solve_meeting_time(&p.two_ou()?)?,
        Problem::Gbm => gbm_rate_infinite(&p.gbm()?, &p.upper()?)?.horizon,
        Problem::CorrGbm => corr_gbm_rate(&p.pair()?)?.horizon,
        Problem::OuCorridor | Problem::TimeChanged => return Err(unsupported("hit-time", problem)),
    };
    Ok(document("hit-time", Some(problem), p, obj(json!({ "hit_time": number(t) }))))
}

fn exponential(x0: f64, c: f64, horizon: f64, n: usize) -> SampledPath {
    SampledPath::from_fn(horizon, n, |s| x0 * (c * s).exp())
}

/// Optimal path(s) of `problem`; the second entry is set for two-path problems.
pub fn optimal_paths(problem: Problem, p: &mut Params) -> Result<(SampledPath, Option<SampledPath>), CliError> {
    let n = p.n_or(200);
    Ok(match problem {
        Problem::OuLower | Problem::OuUpper => {
            let (model, bound) = (p.ou()?, single_bound(problem, p)?);
            let path = match p.t {
                Some(t) => optimal_path_fixed_time(&model, &bound, t, n)?,
                None => optimal_path_infinite(&model, &bound, n)?,
            };
            (path, None)
        }
        Problem::OuDrift => (drift_optimal_path(&p.ou()?, &p.upper()?, n)?, None),
        Problem::Gbm => {
            let (model, bound) = (p.gbm()?, p.upper()?);
            let path = match p.horizon {
                Some(h) => gbm_optimal_path_finite(&model, &bound, h, n)?,
                None => gbm_optimal_path(&model, &bound, n)?,
            };
            (path, None)
        }
        Problem::TwoOu => {
            let (x, y) = meeting_paths(&p.two_ou()?, n)?;
            (x, Some(y))
        }
        Problem::CorrGbm => {
            let pair = p.pair()?;
            let sol = corr_gbm_rate(&pair)?;
            let x = exponential(pair.x0, sol.c1, sol.horizon, n);
            let y = exponential(pair.y0, sol.c2, sol.horizon, n);
            (x, Some(y))
        }
        Problem::OuCorridor | Problem::TimeChanged => return Err(unsupported("path", problem)),
    })
}

fn path_table(x: &SampledPath, y: Option<&SampledPath>) -> Table {
    match y {
        Some(y) => Table::from_pair(x, y),
        None => Table::from_path(x),
    }
}

pub fn path(problem: Problem, p: &mut Params) -> Result<Table, CliError> {
    let (x, y) = optimal_paths(problem, p)?;
    Ok(path_table(&x, y.as_ref()))
}

pub fn classify(p: &mut Params) -> Result<Artifact, CliError> {
    let (model, bound, t) = (p.ou()?, p.lower()?, p.time()?);
    let report = classify_crossing(&model, &bound, t)?;
    let tau = second_crossing(&model, &bound, t)?;
    let fixed = j_star(&model, &bound, t);
    let mut body = obj(json!({
        "t1": number(report.t1),
        "t2": number(report.t2),
        "t_opt": number(report.t_opt),
        "case": serde_json::to_value(report.case).unwrap_or(Value::Null),
        "tau_relation": serde_json::to_value(report.tau_relation).unwrap_or(Value::Null),
        "ordering_holds": report.ordering_holds,
        "tau": tau.map_or(Value::Null, number),
        "fixed_time_value": number(fixed),
    }));
    if t <= report.t2 {
        body.insert("constrained_value".into(), number(fixed));
    } else {
        body.insert("constrained_value".into(), Value::Null);
        body.insert("note".into(), "constrained value not available".into());
    }
    Ok(document("classify", None, p, body))
}

fn hit_problem(problem: Problem, p: &mut Params) -> Result<HitProblem, CliError> {
    Ok(match problem {
        Problem::OuLower | Problem::OuUpper => HitProblem::Ou { model: p.ou()?, bound: single_bound(problem, p)? },
        Problem::OuDrift => HitProblem::Ou { model: p.ou()?, bound: p.upper()? },
        Problem::OuCorridor => HitProblem::OuCorridor { model: p.ou()?, lower: p.lower()?, upper: p.upper()? },
        Problem::TimeChanged => HitProblem::TimeChangedCorridor { model: p.ou()?, lower: p.lower()?, upper: p.upper()? },
        Problem::Gbm => HitProblem::Gbm { model: p.gbm()?, bound: p.upper()? },
        Problem::CorrGbm => HitProblem::CorrGbmMeeting { pair: p.pair()? },
        Problem::TwoOu => return Err(unsupported("simulate", problem)),
    })
}

/// Exact probability of the event a simulation of `problem` estimates, when
/// one is available.
fn exact_reference(problem: &HitProblem, horizon: f64) -> Result<Option<f64>, CliError> {
    Ok(match problem {
        HitProblem::Gbm { model, bound } => Some(gbm_exact_hit_prob(model, bound, Horizon::Finite(horizon))?.prob),
        HitProblem::OuCorridor { model, lower, upper } | HitProblem::TimeChangedCorridor { model, lower, upper }
            if lower.exponent == model.mu && upper.exponent == model.mu && model.r == 0.0 =>
        {
            Some(corridor_exit(model.mu, model.sigma, model.x0, lower, upper, horizon)?)
        }
        _ => None,
    })
}

fn corridor_exit(mu: f64, sigma: f64, x0: f64, lower: &ExpBoundary, upper: &ExpBoundary, horizon: f64) -> Result<f64, CliError> {
    let tau = time_change_forward(&TimeChange::new(mu, sigma)?, horizon);
    Ok(1.0 - two_boundary_survival(upper.level0 - x0, x0 - lower.level0, tau, 1e-14)?)
}

pub enum SimOutput {
    Estimate,
    SamplePath,
    Extreme,
}

pub fn simulate(problem: Problem, p: &mut Params, mode: SimOutput) -> Result<Artifact, CliError> {
    let hp = hit_problem(problem, p)?;
    let cfg = p.sim()?;
    match mode {
        SimOutput::Estimate => {
            let est = estimate_hit_prob(&hp, &cfg)?;
            let mut body = obj(json!({
                "p_hat": number(est.p_hat),
                "stderr": number(est.stderr),
                "n_paths": est.n_paths,
                "n_hits": est.n_hits,
            }));
            if let Some(exact) = exact_reference(&hp, cfg.horizon)? {
                body.insert("exact".into(), number(exact));
                body.insert("z_score".into(), number(est.z_score(exact)));
            }
            Ok(document("simulate", Some(problem), p, body))
        }
        SimOutput::SamplePath => Ok(Artifact::Csv(match hp {
            HitProblem::Ou { model, .. } | HitProblem::OuCorridor { model, .. } => Table::from_path(&simulate_ou(&model, &cfg)?),
            HitProblem::Gbm { model, .. } => Table::from_path(&simulate_gbm(&model, &cfg)?),
            HitProblem::CorrGbmMeeting { pair } => {
                let (x, y) = simulate_corr_gbm(&pair, &cfg)?;
                Table::from_pair(&x, &y)
            }
            HitProblem::TimeChangedCorridor { .. } => return Err(unsupported("simulate --path", problem)),
        })),
        SimOutput::Extreme => Ok(Artifact::Csv(Table::from_path(&extract_extreme_path(&hp, &cfg)?))),
    }
}

fn probability_body(prob: HitProbability, rate: Option<f64>, eps: f64) -> Map<String, Value> {
    let mut body = obj(json!({
        "prob": number(prob.prob),
        "log_prob": number(prob.log_prob),
        "eps": number(eps),
        "scaled_log_prob": number(-eps * prob.log_prob),
    }));
    if let Some(rate) = rate {
        body.insert("rate".into(), number(rate));
    }
    body
}

pub fn exact(problem: Problem, p: &mut Params) -> Result<Artifact, CliError> {
    let eps = p.eps();
    let body = match problem {
        Problem::Gbm => {
            let (model, bound) = (p.gbm()?, p.upper()?);
            let (horizon, rate) = match p.horizon {
                Some(h) => (Horizon::Finite(h), gbm_rate_finite(&model, &bound, h)?.rate),
                None => (Horizon::Infinite, gbm_rate_infinite(&model, &bound)?.rate),
            };
            probability_body(gbm_exact_hit_prob(&model.scaled(eps), &bound, horizon)?, Some(rate), eps)
        }
        Problem::CorrGbm => {
            let pair = p.pair()?;
            probability_body(corr_gbm_exact(&pair, eps)?, Some(corr_gbm_rate(&pair)?.rate), eps)
        }
        Problem::OuCorridor => {
            let (model, lower, upper, horizon) = (p.ou()?, p.lower()?, p.upper()?, p.horizon()?);
            if lower.exponent != model.mu || upper.exponent != model.mu {
                return Err(CliError::Usage("exact ou-corridor needs alpha = beta = mu".into()));
            }
            HitProblem::OuCorridor { model, lower, upper }.validate()?;
            let sigma = model.sigma * eps.sqrt();
            let exit = corridor_exit(model.mu, sigma, model.x0, &lower, &upper, horizon)?;
            obj(json!({ "prob": number(exit), "log_prob": number(exit.ln()), "eps": number(eps) }))
        }
        _ => return Err(unsupported("exact", problem)),
    };
    Ok(document("exact", Some(problem), p, body))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn certificate_json(c: &Certificate) -> Value {
    json!({
        "base": number(c.base),
        "min_increase": number(c.min_increase),
        "n_perturbations": c.n_perturbations,
        "all_worse": c.all_worse,
    })
}

fn comparison(closed: (f64, f64), oracle: (f64, f64), cert: &Certificate) -> Map<String, Value> {
    obj(json!({
        "closed_form_rate": number(closed.0),
        "oracle_rate": number(oracle.0),
        "rel_error": number(rel(oracle.0, closed.0)),
        "closed_form_horizon": number(closed.1),
        "oracle_horizon": number(oracle.1),
        "horizon_error": number((oracle.1 - closed.1).abs()),
        "certificate": certificate_json(cert),
    }))
}

const SCAN_POINTS: usize = 60;

pub fn oracle_check(problem: Problem, p: &mut Params) -> Result<Artifact, CliError> {
    let n = p.n_or(2000);
    let seed = *p.seed.get_or_insert(0);
    let body = match problem {
        Problem::OuLower | Problem::OuUpper | Problem::OuDrift => {
            let model = p.ou()?;
            let bound = if problem == Problem::OuLower { p.lower()? } else { p.upper()? };
            let (sol, path) = if problem == Problem::OuDrift {
                (drift_rate(&model, &bound)?, drift_optimal_path(&model, &bound, n)?)
            } else {
                (rate_infinite(&model, &bound)?, optimal_path_infinite(&model, &bound, n)?)
            };
            let kind = ActionKind::OuLinear { mu: model.mu, r: model.r, sigma: model.sigma };
            let t_max = *p.horizon.get_or_insert(10.0 / model.mu);
            let res = minimize_free_time(&kind, model.x0, &bound, (0.02, t_max), SCAN_POINTS, n)?;
            let cert = perturbation_certificate(&path, &kind, 50, seed)?;
            let mut body = comparison((sol.rate, sol.horizon), (res.value, res.t_star), &cert);
            body.insert("oracle_respects_boundary".into(), res.respects_boundary.into());
            body
        }
        Problem::TwoOu => {
            let model = p.two_ou()?;
            let sol = meeting_solution(&model)?;
            let kind = ActionKind::TwoOu { alpha: model.alpha, beta: model.beta, sigma: model.sigma, b: model.b };
            let t_max = *p.horizon.get_or_insert(10.0 / model.beta);
            let res = minimize_two_path_free_time(&kind, model.x0, model.y0, (0.02, t_max), SCAN_POINTS, n)?;
            let (x, y) = meeting_paths(&model, n)?;
            let cert = perturbation_certificate_pair(&x, &y, &kind, 50, seed)?;
            comparison((sol.rate, sol.meet_time), (res.value, res.horizon), &cert)
        }
        Problem::Gbm => {
            let (model, bound) = (p.gbm()?, p.upper()?);
            let sol = match p.horizon {
                Some(h) => gbm_rate_finite(&model, &bound, h)?,
                None => gbm_rate_infinite(&model, &bound)?,
            };
            let kind = ActionKind::GbmLog { mu: model.mu, sigma: model.sigma };
            let action = DiscreteAction {
                horizon: sol.horizon,
                n,
                kind,
                left: model.x0,
                right: Endpoint::FreeOnCurve(bound),
            };
            let (path, value) = minimize_fixed_endpoints(&action)?;
            let cert = perturbation_certificate(&path, &kind, 50, seed)?;
            comparison((sol.rate, sol.horizon), (value, sol.horizon), &cert)
        }
        Problem::CorrGbm => {
            let pair = p.pair()?;
            let sol = corr_gbm_rate(&pair)?;
            let kind = ActionKind::CorrGbm { alpha: pair.alpha, beta: pair.beta, sigma: pair.sigma, b: pair.b, rho: pair.rho };
            let res = minimize_two_path(&kind, sol.horizon, n, pair.x0, pair.y0)?;
            let cert = perturbation_certificate_pair(&res.x, &res.y, &kind, 50, seed)?;
            comparison((sol.rate, sol.horizon), (res.value, sol.horizon), &cert)
        }
        Problem::OuCorridor | Problem::TimeChanged => return Err(unsupported("oracle-check", problem)),
    };
    Ok(document("oracle-check", Some(problem), p, body))
}
