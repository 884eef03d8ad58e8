//! Large-deviation rates and most-likely paths for the Ornstein–Uhlenbeck
//! process `dX = (μX + r) dt + σ dW` against an exponential boundary.
//!
//! Every rate here is the minimum of the action
//! `(1/2σ²) ∫ (x' − μx − r)² dt` over paths from `x0` to the boundary. The
//! Euler–Lagrange equation `x'' = μ²x + μr` makes extremals combinations of
//! `e^{±μt}`, so everything reduces to locating one hitting time:
//!
//! * fixed horizon `t`: the path with both endpoints pinned, action `J*(t)`;
//! * horizon `T`: `J*` is minimised on `(0, T]`, i.e. at `T ∧ t°`, where
//!   `t°` solves `φ_V(t) = x0/v0` (lower) or `φ_U(t) = x0/u0` (upper);
//! * infinite horizon: the transversality condition at the free end picks
//!   `t°` directly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::boundary::{ExpBoundary, Side};
use crate::error::{ensure, Error, Result};
use crate::numerics::{expand_bracket, find_root_default, Bracket};
use crate::path::SampledPath;

/// Tolerance on `|t − t1|` below which the fixed-time path is reported as
/// the `c1 = 0` case.
pub const T1_TOLERANCE: f64 = 1e-9;
const BRACKET_START: f64 = 1e-6;

/// OU model `dX = (μX + r) dt + σ dW`, `X(0) = x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuModel {
    pub mu: f64,
    pub r: f64,
    pub sigma: f64,
    pub x0: f64,
}

impl OuModel {
    pub fn new(mu: f64, sigma: f64, x0: f64) -> Self {
        Self { mu, r: 0.0, sigma, x0 }
    }

    pub fn with_drift(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    fn validate_base(&self) -> Result<()> {
        ensure(self.mu > 0.0 && self.mu.is_finite(), || {
            format!("mu must be positive, got {}", self.mu)
        })?;
        ensure(self.sigma > 0.0 && self.sigma.is_finite(), || {
            format!("sigma must be positive, got {}", self.sigma)
        })?;
        ensure(self.x0 > 0.0 && self.x0.is_finite(), || {
            format!("x0 must be positive, got {}", self.x0)
        })?;
        ensure(self.r.is_finite(), || format!("r must be finite, got {}", self.r))
    }
}

/// Checks the strict orderings every OU theorem here assumes:
/// `0 < β < μ`, `0 < v0 < x0` (lower) or `0 < μ < α`, `x0 < u0` (upper).
pub fn validate(model: &OuModel, bound: &ExpBoundary) -> Result<()> {
    model.validate_base()?;
    ensure(model.r == 0.0, || {
        format!("constant drift r = {} requires the drift_* routines", model.r)
    })?;
    validate_boundary(model, bound)
}

fn validate_boundary(model: &OuModel, bound: &ExpBoundary) -> Result<()> {
    let (mu, x0) = (model.mu, model.x0);
    let (level, k) = (bound.level0, bound.exponent);
    ensure(level > 0.0 && level.is_finite() && k.is_finite(), || {
        format!("boundary level must be positive, got {level}")
    })?;
    match bound.side {
        Side::Lower => {
            ensure(0.0 < k && k < mu, || format!("lower boundary needs 0 < beta < mu, got beta={k}, mu={mu}"))?;
            ensure(level < x0, || format!("lower boundary needs v0 < x0, got v0={level}, x0={x0}"))
        }
        Side::Upper => {
            ensure(mu < k, || format!("upper boundary needs mu < alpha, got alpha={k}, mu={mu}"))?;
            ensure(x0 < level, || format!("upper boundary needs x0 < u0, got u0={level}, x0={x0}"))
        }
    }
}

/// `φ_V(t) = (1 − β/μ) e^{(μ+β)t} + (β/μ) e^{(β−μ)t}`; strictly increasing from 1.
pub fn phi_lower(mu: f64, beta: f64, t: f64) -> f64 {
    (1.0 - beta / mu) * ((mu + beta) * t).exp() + beta / mu * ((beta - mu) * t).exp()
}

/// `φ_U(t) = (α/μ) e^{(α−μ)t} − (α/μ − 1) e^{(μ+α)t}`; strictly decreasing from 1.
pub fn phi_upper(mu: f64, alpha: f64, t: f64) -> f64 {
    alpha / mu * ((alpha - mu) * t).exp() - (alpha / mu - 1.0) * ((mu + alpha) * t).exp()
}

/// `φ_2(t) = (1 − β/μ) e^{(β+μ)t} + (1 + β/μ) e^{(β−μ)t}`, whose level set
/// `2·x0/v0` is the tangency time `t2`.
pub fn phi2(mu: f64, beta: f64, t: f64) -> f64 {
    (1.0 - beta / mu) * ((beta + mu) * t).exp() + (1.0 + beta / mu) * ((beta - mu) * t).exp()
}

fn solve_increasing(f: impl Fn(f64) -> f64) -> Result<f64> {
    let bracket = expand_bracket(&f, BRACKET_START)?;
    find_root_default(&f, bracket)
}

/// Optimal hitting time `t°_V` for the lower curve: root of `φ_V(t) = x0/v0`.
pub fn solve_topt_lower(model: &OuModel, bound: &ExpBoundary) -> Result<f64> {
    validate(model, bound)?;
    ensure(bound.side == Side::Lower, || "expected a lower boundary".into())?;
    let (mu, beta, target) = (model.mu, bound.exponent, model.x0 / bound.level0);
    solve_increasing(|t| phi_lower(mu, beta, t) - target)
}

/// Optimal hitting time `t°_U` for the upper curve: root of `φ_U(t) = x0/u0`,
/// equivalently of the transversality equation
/// `(α/μ − 1) e^{(μ+α)T} − (α/μ) e^{(α−μ)T} + x0/u0 = 0`.
pub fn solve_topt_upper(model: &OuModel, bound: &ExpBoundary) -> Result<f64> {
    validate(model, bound)?;
    ensure(bound.side == Side::Upper, || "expected an upper boundary".into())?;
    let (mu, alpha, target) = (model.mu, bound.exponent, model.x0 / bound.level0);
    solve_increasing(|t| transversality_upper(mu, alpha, target, t))
}

fn transversality_upper(mu: f64, alpha: f64, ratio: f64, t: f64) -> f64 {
    (alpha / mu - 1.0) * ((mu + alpha) * t).exp() - alpha / mu * ((alpha - mu) * t).exp() + ratio
}

/// Dispatches to [`solve_topt_lower`] or [`solve_topt_upper`].
pub fn solve_topt(model: &OuModel, bound: &ExpBoundary) -> Result<f64> {
    match bound.side {
        Side::Lower => solve_topt_lower(model, bound),
        Side::Upper => solve_topt_upper(model, bound),
    }
}

/// Fixed-time minimal action
/// `J*(t) = (μ/σ²) (L e^{κt} − x0 e^{μt})² / (e^{2μt} − 1)`, evaluated in a
/// form that neither overflows for large `μt` nor cancels for small `t`.
pub fn j_star(model: &OuModel, bound: &ExpBoundary, t: f64) -> f64 {
    let mu = model.mu;
    let gap = bound.level0 * ((bound.exponent - mu) * t).exp() - model.x0;
    mu / (model.sigma * model.sigma) * gap * gap / -(-2.0 * mu * t).exp_m1()
}

/// Coefficients `(c1, c2)` of `x(s) = c1 e^{μs} + c2 e^{−μs}` through
/// `(0, x0)` and `(t, end)`.
fn pinned_coefficients(x0: f64, end: f64, mu: f64, t: f64) -> (f64, f64) {
    let em = (-mu * t).exp();
    let denom = -(-2.0 * mu * t).exp_m1();
    let c1 = (end * em - x0 * em * em) / denom;
    let c2 = (x0 - end * em) / denom;
    (c1, c2)
}

/// Named residuals attached to a closed-form solution. Values are relative
/// unless the name says otherwise.
pub type Residuals = BTreeMap<String, f64>;

/// Closed-form rate together with the optimal horizon and the coefficients
/// of the extremal `x(s) = c1 e^{μs} + c2 e^{−μs}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSolution {
    pub rate: f64,
    pub horizon: f64,
    pub coeff_c1: f64,
    pub coeff_c2: f64,
    pub residuals: Residuals,
}

impl RateSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |m, r| m.max(r.abs()))
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn pinned_solution(model: &OuModel, bound: &ExpBoundary, t: f64) -> RateSolution {
    let mu = model.mu;
    let end = bound.value(t);
    let (c1, c2) = pinned_coefficients(model.x0, end, mu, t);
    let rate = j_star(model, bound, t);
    let from_c2 = mu * c2 * c2 * -(-2.0 * mu * t).exp_m1() / (model.sigma * model.sigma);
    let mut residuals = Residuals::new();
    residuals.insert("bc_start".into(), rel(c1 + c2, model.x0));
    residuals.insert("bc_end".into(), rel(c1 * (mu * t).exp() + c2 * (-mu * t).exp(), end));
    residuals.insert("rate_from_c2".into(), rel(rate, from_c2));
    RateSolution {
        rate,
        horizon: t,
        coeff_c1: c1,
        coeff_c2: c2,
        residuals,
    }
}

/// Finite-horizon rate `I(T) = J*(T ∧ t°)`. A horizon equal to `t°` takes
/// the unclamped branch; both branches agree there.
pub fn rate_finite(model: &OuModel, bound: &ExpBoundary, horizon: f64) -> Result<RateSolution> {
    validate(model, bound)?;
    ensure(horizon > 0.0 && !horizon.is_nan(), || format!("horizon must be positive, got {horizon}"))?;
    let t_opt = solve_topt(model, bound)?;
    let t = if horizon <= t_opt { horizon } else { t_opt };
    Ok(pinned_solution(model, bound, t))
}

/// The fixed-time extremal from `x0` to `L e^{κt}`, sampled on `n + 1`
/// equally spaced points of `[0, t]`:
/// `x(s) = (L e^{κt} sinh(μs) + x0 sinh(μ(t − s))) / sinh(μt)`.
pub fn optimal_path_fixed_time(model: &OuModel, bound: &ExpBoundary, t: f64, n: usize) -> Result<SampledPath> {
    validate(model, bound)?;
    ensure(t > 0.0 && t.is_finite(), || format!("time must be positive, got {t}"))?;
    ensure(n >= 2, || format!("need at least 2 intervals, got {n}"))?;
    let (mu, x0, end) = (model.mu, model.x0, bound.value(t));
    let s_t = (mu * t).sinh();
    Ok(SampledPath::from_fn(t, n, |s| {
        (end * (mu * s).sinh() + x0 * (mu * (t - s)).sinh()) / s_t
    }))
}

/// `k = μ/κ − 1` and the normalised denominator `e^{−2μT} + k` of the
/// infinite-horizon extremal.
fn free_end_terms(mu: f64, exponent: f64, t: f64) -> (f64, f64) {
    let k = mu / exponent - 1.0;
    (k, (-2.0 * mu * t).exp() + k)
}

/// Infinite-horizon rate: minimal action over all hitting times, with the
/// horizon fixed by transversality. Lower boundary:
/// `x0² μ/σ² · (1 − e^{−2μT})/(1 + β/(μ−β) e^{−2μT})²`; upper boundary the
/// same with `α` in place of `β`.
pub fn rate_infinite(model: &OuModel, bound: &ExpBoundary) -> Result<RateSolution> {
    validate(model, bound)?;
    let t = solve_topt(model, bound)?;
    let (mu, sigma, x0, kappa, level) = (model.mu, model.sigma, model.x0, bound.exponent, bound.level0);
    let e2 = (-2.0 * mu * t).exp();
    let q = 1.0 + kappa / (mu - kappa) * e2;
    let rate = x0 * x0 * mu / (sigma * sigma) * -(-2.0 * mu * t).exp_m1() / (q * q);

    let (k, d) = free_end_terms(mu, kappa, t);
    let c1 = x0 * e2 / d;
    let c2 = x0 * k / d;

    let mut residuals = Residuals::new();
    let phi = match bound.side {
        Side::Lower => phi_lower(mu, kappa, t),
        Side::Upper => phi_upper(mu, kappa, t),
    };
    residuals.insert("phi".into(), rel(phi, x0 / level));
    // free-end condition: L e^{κT} = (μ/κ) c1 e^{μT}
    residuals.insert(
        "transversality".into(),
        rel(bound.value(t), mu / kappa * c1 * (mu * t).exp()),
    );
    residuals.insert("bc_start".into(), rel(c1 + c2, x0));
    residuals.insert(
        "bc_end".into(),
        rel(c1 * (mu * t).exp() + c2 * (-mu * t).exp(), bound.value(t)),
    );
    residuals.insert("fixed_time_rate".into(), rel(rate, j_star(model, bound, t)));
    if bound.side == Side::Upper {
        let (a, b) = upper_rate_alternatives(model, bound, t);
        residuals.insert("alt_forms".into(), rel(a, b));
        residuals.insert("alt_first".into(), rel(rate, a));
    }
    Ok(RateSolution {
        rate,
        horizon: t,
        coeff_c1: c1,
        coeff_c2: c2,
        residuals,
    })
}

/// The two alternative expressions for the upper infinite-horizon rate at
/// the solved `T_U`:
/// `(μ/σ²)(u0 e^{(α−μ)T} − x0)²/(1 − e^{−2μT})` and
/// `(μ/σ²) u0² (1 − α/μ)² e^{2αT} (e^{2μT} − 1)`.
pub fn upper_rate_alternatives(model: &OuModel, bound: &ExpBoundary, t: f64) -> (f64, f64) {
    let (mu, s2, x0, u0, alpha) = (model.mu, model.sigma * model.sigma, model.x0, bound.level0, bound.exponent);
    let gap = u0 * ((alpha - mu) * t).exp() - x0;
    let first = mu / s2 * gap * gap / -(-2.0 * mu * t).exp_m1();
    let f = 1.0 - alpha / mu;
    let second = mu / s2 * u0 * u0 * f * f * (2.0 * alpha * t).exp() * (2.0 * mu * t).exp_m1();
    (first, second)
}

/// Infinite-horizon extremal on `[0, T]` in the start-normalised form
/// `x0 (e^{−μ(T−t)} + k e^{μ(T−t)}) / (e^{−μT} + k e^{μT})`, `k = μ/κ − 1`.
pub fn optimal_path_infinite(model: &OuModel, bound: &ExpBoundary, n: usize) -> Result<SampledPath> {
    validate(model, bound)?;
    ensure(n >= 2, || format!("need at least 2 intervals, got {n}"))?;
    let t_end = solve_topt(model, bound)?;
    let (mu, x0) = (model.mu, model.x0);
    let (k, d) = free_end_terms(mu, bound.exponent, t_end);
    Ok(SampledPath::from_fn(t_end, n, |t| {
        x0 * ((-mu * (2.0 * t_end - t)).exp() + k * (-mu * t).exp()) / d
    }))
}

/// The same extremal in the boundary-normalised form
/// `L e^{κT} ((κ/μ) e^{−μ(T−t)} − (κ/μ − 1) e^{μ(T−t)})`.
pub fn optimal_path_infinite_alt(model: &OuModel, bound: &ExpBoundary, n: usize) -> Result<SampledPath> {
    validate(model, bound)?;
    ensure(n >= 2, || format!("need at least 2 intervals, got {n}"))?;
    let t_end = solve_topt(model, bound)?;
    let mu = model.mu;
    let ratio = bound.exponent / mu;
    let end = bound.value(t_end);
    Ok(SampledPath::from_fn(t_end, n, |t| {
        end * (ratio * (-mu * (t_end - t)).exp() - (ratio - 1.0) * (mu * (t_end - t)).exp())
    }))
}

/// True when every sample before the last lies strictly on the admissible
/// side of `bound` (above a lower curve, below an upper one).
pub fn respects_boundary(path: &SampledPath, bound: &ExpBoundary) -> bool {
    let n = path.len();
    path.iter().take(n.saturating_sub(1)).all(|(t, x)| match bound.side {
        Side::Lower => x > bound.value(t),
        Side::Upper => x < bound.value(t),
    })
}

/// Shape of the fixed-time extremal relative to the lower curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingCase {
    /// `t < t1`: `c1 < 0`, the path decreases and meets `V` once.
    MonotoneSingleCross,
    /// `t = t1`: `c1 = 0`, `x(s) = x0 e^{−μs}`.
    TangentAtT1,
    /// `t > t1`: both coefficients positive; convex path meeting `V` twice.
    ConvexDoubleCross,
}

/// Position of the second intersection `τ(t)` relative to `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauRelation {
    TauAfterT,
    TauEqualsT,
    TauBeforeT,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub t1: f64,
    pub t2: f64,
    pub t_opt: f64,
    pub case: CrossingCase,
    pub tau_relation: TauRelation,
    /// Whether `t1 < t_opt < t2` held for the computed values.
    pub ordering_holds: bool,
}

/// `t1 = log(x0/v0)/(μ + β)`: the fixed time at which `c1` changes sign.
pub fn crossing_t1(model: &OuModel, bound: &ExpBoundary) -> f64 {
    (model.x0 / bound.level0).ln() / (model.mu + bound.exponent)
}

/// `t2`: root of `φ_2(t) = 2 x0/v0`; beyond it the fixed-time path reaches
/// `V` from below and violates the path constraint.
pub fn crossing_t2(model: &OuModel, bound: &ExpBoundary) -> Result<f64> {
    validate(model, bound)?;
    ensure(bound.side == Side::Lower, || "expected a lower boundary".into())?;
    let (mu, beta, target) = (model.mu, bound.exponent, 2.0 * model.x0 / bound.level0);
    solve_increasing(|t| phi2(mu, beta, t) - target)
}

/// Classifies the fixed-time extremal ending on the lower curve at `t`.
pub fn classify_crossing(model: &OuModel, bound: &ExpBoundary, t: f64) -> Result<CrossingReport> {
    validate(model, bound)?;
    ensure(bound.side == Side::Lower, || "expected a lower boundary".into())?;
    ensure(t > 0.0 && t.is_finite(), || format!("time must be positive, got {t}"))?;
    let t1 = crossing_t1(model, bound);
    let t2 = crossing_t2(model, bound)?;
    let t_opt = solve_topt_lower(model, bound)?;
    let case = if (t - t1).abs() <= T1_TOLERANCE {
        CrossingCase::TangentAtT1
    } else if t < t1 {
        CrossingCase::MonotoneSingleCross
    } else {
        CrossingCase::ConvexDoubleCross
    };
    let tau_relation = match case {
        CrossingCase::ConvexDoubleCross => {
            if (t - t2).abs() <= T1_TOLERANCE {
                TauRelation::TauEqualsT
            } else if t < t2 {
                TauRelation::TauAfterT
            } else {
                TauRelation::TauBeforeT
            }
        }
        _ => TauRelation::NotApplicable,
    };
    Ok(CrossingReport {
        t1,
        t2,
        t_opt,
        case,
        tau_relation,
        ordering_holds: t1 < t_opt && t_opt < t2,
    })
}

/// The second zero `τ(t)` of `h(s) = x(s) − V(s)` for the fixed-time
/// extremal extended past `t`. `None` unless `t > t1`.
///
/// `h` is convex-like with a single critical point `s1`; `τ` lies beyond
/// `s1` when `t < t2` and in `(0, s1)` when `t > t2`.
pub fn second_crossing(model: &OuModel, bound: &ExpBoundary, t: f64) -> Result<Option<f64>> {
    let report = classify_crossing(model, bound, t)?;
    if report.case != CrossingCase::ConvexDoubleCross {
        return Ok(None);
    }
    if report.tau_relation == TauRelation::TauEqualsT {
        return Ok(Some(t));
    }
    let (mu, beta, v0) = (model.mu, bound.exponent, bound.level0);
    let (c1, c2) = pinned_coefficients(model.x0, bound.value(t), mu, t);
    let h = |s: f64| c1 * (mu * s).exp() + c2 * (-mu * s).exp() - v0 * (beta * s).exp();
    // h'(s) e^{−μs}, increasing in s
    let h1 = |s: f64| mu * c1 - mu * c2 * (-2.0 * mu * s).exp() - beta * v0 * (-(mu - beta) * s).exp();
    let s1 = find_root_default(h1, expand_bracket(h1, BRACKET_START)?)?;
    let tau = if report.tau_relation == TauRelation::TauAfterT {
        let g = |d: f64| h(s1 + d);
        let b = expand_bracket(g, BRACKET_START.max(s1 * 1e-3))?;
        s1 + find_root_default(g, b)?
    } else {
        find_root_default(h, Bracket::new(h, 0.0, s1)?)?
    };
    Ok(Some(tau))
}

fn validate_drift(model: &OuModel, bound: &ExpBoundary) -> Result<()> {
    model.validate_base()?;
    ensure(bound.side == Side::Upper, || "constant-drift problem needs an upper boundary".into())?;
    validate_boundary(model, bound)?;
    let limit = bound.level0 * (bound.exponent - model.mu);
    if model.r >= limit {
        return Err(Error::AssumptionViolated(format!(
            "r = {} must be below u0 (alpha - mu) = {limit}",
            model.r
        )));
    }
    Ok(())
}

/// Left-hand side of the hitting-time equation with constant drift:
/// `u0(α/μ − 1) e^{(α+μ)T} − u0(α/μ) e^{(α−μ)T} − (r/μ) e^{μT} + x0 + r/μ`.
pub fn drift_equation(model: &OuModel, bound: &ExpBoundary, t: f64) -> f64 {
    let (mu, r, x0, u0, alpha) = (model.mu, model.r, model.x0, bound.level0, bound.exponent);
    u0 * (alpha / mu - 1.0) * ((alpha + mu) * t).exp() - u0 * alpha / mu * ((alpha - mu) * t).exp()
        - r / mu * (mu * t).exp()
        + x0
        + r / mu
}

/// Optimal hitting time of the upper curve with constant drift `r`.
pub fn drift_solve_t(model: &OuModel, bound: &ExpBoundary) -> Result<f64> {
    validate_drift(model, bound)?;
    solve_increasing(|t| drift_equation(model, bound, t))
}

fn drift_coefficients(model: &OuModel, bound: &ExpBoundary, t: f64) -> (f64, f64) {
    let (mu, shift) = (model.mu, model.r / model.mu);
    let start = model.x0 + shift;
    let end = bound.value(t) + shift;
    pinned_coefficients(start, end, mu, t)
}

/// Rate for the upper curve with constant drift:
/// `(μ/σ²)(u0 e^{(α−μ)T} − (r/μ)(1 − e^{−μT}) − x0)² / (1 − e^{−2μT})`.
pub fn drift_rate(model: &OuModel, bound: &ExpBoundary) -> Result<RateSolution> {
    let t = drift_solve_t(model, bound)?;
    let (mu, r, sigma, x0, u0, alpha) = (model.mu, model.r, model.sigma, model.x0, bound.level0, bound.exponent);
    let gap = u0 * ((alpha - mu) * t).exp() + r / mu * (-mu * t).exp_m1() - x0;
    let rate = mu / (sigma * sigma) * gap * gap / -(-2.0 * mu * t).exp_m1();
    let (c1, c2) = drift_coefficients(model, bound, t);
    let from_c2 = mu * c2 * c2 * -(-2.0 * mu * t).exp_m1() / (sigma * sigma);
    let shift = r / mu;
    let mut residuals = Residuals::new();
    residuals.insert("equation_abs".into(), drift_equation(model, bound, t));
    residuals.insert("bc_start".into(), rel(c1 + c2 - shift, x0));
    residuals.insert(
        "bc_end".into(),
        rel(c1 * (mu * t).exp() + c2 * (-mu * t).exp() - shift, bound.value(t)),
    );
    residuals.insert(
        "transversality".into(),
        rel(bound.slope(t), mu * c1 * (mu * t).exp()),
    );
    residuals.insert("rate_from_c2".into(), rel(rate, from_c2));
    Ok(RateSolution {
        rate,
        horizon: t,
        coeff_c1: c1,
        coeff_c2: c2,
        residuals,
    })
}

/// Extremal with constant drift:
/// `((x0 + r/μ) sinh(μ(T−t)) + (u0 e^{αT} + r/μ) sinh(μt)) / sinh(μT) − r/μ`.
pub fn drift_optimal_path(model: &OuModel, bound: &ExpBoundary, n: usize) -> Result<SampledPath> {
    ensure(n >= 2, || format!("need at least 2 intervals, got {n}"))?;
    let t_end = drift_solve_t(model, bound)?;
    let (mu, shift) = (model.mu, model.r / model.mu);
    let start = model.x0 + shift;
    let end = bound.value(t_end) + shift;
    let s_t = (mu * t_end).sinh();
    Ok(SampledPath::from_fn(t_end, n, |t| {
        (start * (mu * (t_end - t)).sinh() + end * (mu * t).sinh()) / s_t - shift
    }))
}

/// Terminal slopes `(x'(T), U'(T))` of the constant-drift extremal. The
/// path meets the curve from below, so the first exceeds the second.
pub fn drift_terminal_slopes(model: &OuModel, bound: &ExpBoundary) -> Result<(f64, f64)> {
    let t = drift_solve_t(model, bound)?;
    let mu = model.mu;
    let (c1, c2) = drift_coefficients(model, bound, t);
    let slope = mu * c1 * (mu * t).exp() - mu * c2 * (-mu * t).exp();
    Ok((slope, bound.slope(t)))
}
