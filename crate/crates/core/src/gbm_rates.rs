//! Geometric Brownian motion `dX = μX dt + σX dW` against an upper curve
//! `u0 e^{αt}`, and the meeting problem for a correlated pair.
//!
//! In log space the action is `(1/2σ²) ∫ ((log x)' − μ)² dt`, so the
//! extremals are straight lines `log x0 + c t`. A lower curve is handled by
//! the reflection `x ↦ 1/x`, which turns `(μ, σ, x0)` and `v0 e^{βt}` into
//! `(σ² − μ, σ, 1/x0)` and `(1/v0) e^{−βt}`.

use serde::{Deserialize, Serialize};

use crate::boundary::{ExpBoundary, Side};
use crate::error::{ensure, Error, Result};
use crate::numerics::{log_add_exp, log_normal_cdf};
use crate::path::SampledPath;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub mu: f64,
    pub sigma: f64,
    pub x0: f64,
}

impl GbmModel {
    pub fn new(mu: f64, sigma: f64, x0: f64) -> Self {
        Self { mu, sigma, x0 }
    }

    /// The model with noise `σ√ε`.
    pub fn scaled(&self, eps: f64) -> Self {
        Self {
            sigma: self.sigma * eps.sqrt(),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrGbmPair {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub b: f64,
    pub rho: f64,
    pub x0: f64,
    pub y0: f64,
}

impl CorrGbmPair {
    /// `σ² + b² − 2ρbσ`, the variance rate of `log X − log Y`.
    pub fn relative_variance(&self) -> f64 {
        self.sigma * self.sigma + self.b * self.b - 2.0 * self.rho * self.b * self.sigma
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.sigma, self.b, self.rho, self.x0, self.y0];
        ensure(all.iter().all(|v| v.is_finite()), || "parameters must be finite".into())?;
        ensure(self.alpha > self.beta, || {
            format!("need alpha > beta, got alpha={}, beta={}", self.alpha, self.beta)
        })?;
        ensure(self.sigma > 0.0 && self.b > 0.0, || {
            format!("noise scales must be positive, got sigma={}, b={}", self.sigma, self.b)
        })?;
        ensure(0.0 < self.y0 && self.y0 < self.x0, || {
            format!("need 0 < y0 < x0, got y0={}, x0={}", self.y0, self.x0)
        })?;
        ensure(self.rho.abs() <= 1.0, || format!("need |rho| <= 1, got {}", self.rho))?;
        let d = self.relative_variance();
        let scale = self.sigma * self.sigma + self.b * self.b;
        if d <= 1e-14 * scale {
            return Err(Error::DegenerateNoise(d));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmRateSolution {
    pub rate: f64,
    pub horizon: f64,
    /// Growth rate `c` of the optimal path `x0 e^{ct}`.
    pub exponent_c: f64,
}

/// Optimal growth rates of the correlated pair, `log x = log x0 + c1 t`,
/// `log y = log y0 + c2 t`, meeting at `horizon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrGbmSolution {
    pub rate: f64,
    pub horizon: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

/// A probability with its logarithm, which stays finite when the
/// probability underflows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitProbability {
    pub prob: f64,
    pub log_prob: f64,
}

impl HitProbability {
    fn from_log(log_prob: f64) -> Self {
        let log_prob = log_prob.min(0.0);
        Self {
            prob: log_prob.exp(),
            log_prob,
        }
    }
}

pub fn validate(model: &GbmModel, bound: &ExpBoundary) -> Result<()> {
    ensure(model.mu.is_finite(), || format!("mu must be finite, got {}", model.mu))?;
    ensure(model.sigma > 0.0 && model.sigma.is_finite(), || {
        format!("sigma must be positive, got {}", model.sigma)
    })?;
    ensure(model.x0 > 0.0 && model.x0.is_finite(), || {
        format!("x0 must be positive, got {}", model.x0)
    })?;
    ensure(bound.side == Side::Upper, || "GBM routines take an upper boundary".into())?;
    ensure(bound.exponent > model.mu && bound.exponent.is_finite(), || {
        format!("need alpha > mu, got alpha={}, mu={}", bound.exponent, model.mu)
    })?;
    ensure(bound.level0 > model.x0 && bound.level0.is_finite(), || {
        format!("need u0 > x0, got u0={}, x0={}", bound.level0, model.x0)
    })
}

/// `t_min = log(u0/x0)/(α − μ)`.
pub fn gbm_t_min(model: &GbmModel, bound: &ExpBoundary) -> f64 {
    (bound.level0 / model.x0).ln() / (bound.exponent - model.mu)
}

/// Finite-horizon rate: `2(α−μ) log(u0/x0)/σ²` once `T ≥ t_min`, otherwise
/// `(T/2σ²)(α − μ + log(u0/x0)/T)²`.
pub fn gbm_rate_finite(model: &GbmModel, bound: &ExpBoundary, horizon: f64) -> Result<GbmRateSolution> {
    validate(model, bound)?;
    ensure(horizon > 0.0 && !horizon.is_nan(), || format!("horizon must be positive, got {horizon}"))?;
    let t_min = gbm_t_min(model, bound);
    let l = (bound.level0 / model.x0).ln();
    let gap = bound.exponent - model.mu;
    let s2 = model.sigma * model.sigma;
    if horizon >= t_min {
        Ok(GbmRateSolution {
            rate: 2.0 * gap * l / s2,
            horizon: t_min,
            exponent_c: bound.exponent + l / t_min,
        })
    } else {
        let v = gap + l / horizon;
        Ok(GbmRateSolution {
            rate: horizon / (2.0 * s2) * v * v,
            horizon,
            exponent_c: bound.exponent + l / horizon,
        })
    }
}

/// Infinite-horizon rate `2(α−μ) log(u0/x0)/σ²`, reached at `t_min` along
/// `x0 e^{(2α−μ)t}`.
pub fn gbm_rate_infinite(model: &GbmModel, bound: &ExpBoundary) -> Result<GbmRateSolution> {
    validate(model, bound)?;
    let l = (bound.level0 / model.x0).ln();
    let gap = bound.exponent - model.mu;
    Ok(GbmRateSolution {
        rate: 2.0 * gap * l / (model.sigma * model.sigma),
        horizon: l / gap,
        exponent_c: 2.0 * bound.exponent - model.mu,
    })
}

/// `x0 e^{(2α−μ)t}` on `[0, t_min]`.
pub fn gbm_optimal_path(model: &GbmModel, bound: &ExpBoundary, n: usize) -> Result<SampledPath> {
    ensure(n >= 2, || format!("need at least 2 intervals, got {n}"))?;
    let sol = gbm_rate_infinite(model, bound)?;
    Ok(exponential_path(model.x0, sol.exponent_c, sol.horizon, n))
}

/// `x0 e^{ct}` on `[0, T ∧ t_min]` with `c` the finite-horizon growth rate.
pub fn gbm_optimal_path_finite(model: &GbmModel, bound: &ExpBoundary, horizon: f64, n: usize) -> Result<SampledPath> {
    ensure(n >= 2, || format!("need at least 2 intervals, got {n}"))?;
    let sol = gbm_rate_finite(model, bound, horizon)?;
    Ok(exponential_path(model.x0, sol.exponent_c, sol.horizon, n))
}

fn exponential_path(x0: f64, c: f64, t: f64, n: usize) -> SampledPath {
    SampledPath::from_fn(t, n, |s| x0 * (c * s).exp())
}

/// Exact probability that the GBM reaches `u0 e^{αt}` by `horizon`.
///
/// With `ν = μ − α − σ²/2` and `L = log(u0/x0)`, `log X − αt` is a
/// Brownian motion with drift `ν` that must climb `L`:
/// `p_T = Φ((νT − L)/(σ√T)) + e^{2νL/σ²} Φ((−νT − L)/(σ√T))`, and
/// `p_∞ = min(1, e^{2νL/σ²})`.
pub fn gbm_exact_hit_prob(model: &GbmModel, bound: &ExpBoundary, horizon: Horizon) -> Result<HitProbability> {
    validate(model, bound)?;
    let s2 = model.sigma * model.sigma;
    let nu = model.mu - bound.exponent - s2 / 2.0;
    let l = (bound.level0 / model.x0).ln();
    let reflect = 2.0 * nu * l / s2;
    match horizon {
        Horizon::Infinite => Ok(HitProbability::from_log(reflect.min(0.0))),
        Horizon::Finite(t) => {
            ensure(t > 0.0 && !t.is_nan(), || format!("horizon must be positive, got {t}"))?;
            if t.is_infinite() {
                return Ok(HitProbability::from_log(reflect.min(0.0)));
            }
            let sd = model.sigma * t.sqrt();
            let first = log_normal_cdf((nu * t - l) / sd);
            let second = reflect + log_normal_cdf((-nu * t - l) / sd);
            Ok(HitProbability::from_log(log_add_exp(first, second)))
        }
    }
}

/// Meeting rate `2(α−β) log(x0/y0)/(σ² + b² − 2ρbσ)` at
/// `T = log(x0/y0)/(α−β)`, with growth rates `c1 = α + u1`, `c2 = β + u2`.
pub fn corr_gbm_rate(pair: &CorrGbmPair) -> Result<CorrGbmSolution> {
    pair.validate()?;
    let d = pair.relative_variance();
    let gap = pair.alpha - pair.beta;
    let l = (pair.x0 / pair.y0).ln();
    let u1 = -2.0 * gap * pair.sigma * (pair.sigma - pair.rho * pair.b) / d;
    let u2 = -2.0 * gap * pair.b * (pair.rho * pair.sigma - pair.b) / d;
    Ok(CorrGbmSolution {
        rate: 2.0 * gap * l / d,
        horizon: l / gap,
        c1: pair.alpha + u1,
        c2: pair.beta + u2,
    })
}

/// Exact probability that the pair with noises `σ√ε`, `b√ε` ever meets:
/// `exp(−2u γ_ε/θ_ε²)` with `u = log(x0/y0)`,
/// `γ_ε = α − β + ε(b² − σ²)/2` and `θ_ε² = ε(σ² + b² − 2ρbσ)`.
pub fn corr_gbm_exact(pair: &CorrGbmPair, eps: f64) -> Result<HitProbability> {
    pair.validate()?;
    ensure(eps > 0.0 && eps.is_finite(), || format!("eps must be positive, got {eps}"))?;
    let gamma = pair.alpha - pair.beta + eps * (pair.b * pair.b - pair.sigma * pair.sigma) / 2.0;
    if gamma <= 0.0 {
        return Err(Error::DriftNotPositive(gamma));
    }
    let theta2 = eps * pair.relative_variance();
    let u = (pair.x0 / pair.y0).ln();
    Ok(HitProbability::from_log(-u * 2.0 * gamma / theta2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal_cdf;

    fn fig() -> (GbmModel, ExpBoundary) {
        (GbmModel::new(1.0, 0.5, 1.0), ExpBoundary::upper(1.3, 1.1))
    }

    fn pair() -> CorrGbmPair {
        CorrGbmPair {
            alpha: 1.0,
            beta: 0.5,
            sigma: 0.3,
            b: 0.2,
            rho: 0.5,
            x0: 2.0,
            y0: 1.0,
        }
    }

    #[test]
    fn finite_rate_branches() {
        let (m, b) = fig();
        let t_min = gbm_t_min(&m, &b);
        assert!((t_min - 2.6236).abs() < 1e-4);
        let long = gbm_rate_finite(&m, &b, 5.0).unwrap();
        assert!((long.rate - 2.0 * 0.1 * 1.3_f64.ln() / 0.25).abs() < 1e-14);
        assert_eq!(long.horizon, t_min);
        let short = gbm_rate_finite(&m, &b, 1.0).unwrap();
        let v = 0.1 + 1.3_f64.ln();
        assert!((short.rate - v * v / 0.5).abs() < 1e-14);
        assert!(short.rate > long.rate);
        let at = gbm_rate_finite(&m, &b, t_min).unwrap();
        let just_below = gbm_rate_finite(&m, &b, t_min * (1.0 - 1e-12)).unwrap();
        assert!((at.rate - just_below.rate).abs() < 1e-9);
    }

    #[test]
    fn e_ratio_gives_twice_gap() {
        let m = GbmModel::new(0.2, 1.0, 1.0);
        let b = ExpBoundary::upper(std::f64::consts::E, 0.7);
        assert!((gbm_rate_infinite(&m, &b).unwrap().rate - 1.0).abs() < 1e-14);
    }

    #[test]
    fn infinite_matches_long_finite_and_scaling() {
        let (m, b) = fig();
        let inf = gbm_rate_infinite(&m, &b).unwrap();
        let fin = gbm_rate_finite(&m, &b, 10.0 * inf.horizon).unwrap();
        assert!((inf.rate - fin.rate).abs() < 1e-12);
        assert!((inf.exponent_c - fin.exponent_c).abs() < 1e-12);
        assert!((inf.exponent_c - (2.0 * 1.1 - 1.0)).abs() < 1e-12);
        let scaled = gbm_rate_infinite(&GbmModel { sigma: 1.5, ..m }, &b).unwrap();
        assert!((scaled.rate * (1.5 / 0.5_f64).powi(2) - inf.rate).abs() < 1e-12);
        assert_eq!(scaled.horizon, inf.horizon);
    }

    #[test]
    fn optimal_path_properties() {
        let (m, b) = fig();
        let p = gbm_optimal_path(&m, &b, 300).unwrap();
        assert_eq!(p.first(), Some(1.0));
        let end = b.value(p.horizon());
        assert!((p.last().unwrap() - end).abs() < 1e-10 * end);
        assert!(p.iter().take(p.len() - 1).all(|(t, x)| x < b.value(t)));
    }

    #[test]
    fn exact_probability_limits() {
        let (m, b) = fig();
        let inf = gbm_exact_hit_prob(&m, &b, Horizon::Infinite).unwrap();
        let far = gbm_exact_hit_prob(&m, &b, Horizon::Finite(1e4)).unwrap();
        assert!((inf.prob - far.prob).abs() < 1e-9);
        let p5 = gbm_exact_hit_prob(&m, &b, Horizon::Finite(5.0)).unwrap();
        assert!(p5.prob > 0.0 && p5.prob < inf.prob);
    }

    #[test]
    fn exact_probability_direct_formula() {
        let (m, b) = fig();
        let t: f64 = 5.0;
        let nu = 1.0 - 1.1 - 0.125;
        let l = 1.3_f64.ln();
        let sd = 0.5 * t.sqrt();
        let direct = normal_cdf((nu * t - l) / sd) + (2.0 * nu * l / 0.25).exp() * normal_cdf((-nu * t - l) / sd);
        let p = gbm_exact_hit_prob(&m, &b, Horizon::Finite(t)).unwrap();
        assert!((p.prob - direct).abs() < 1e-14);
    }

    #[test]
    fn exact_probability_small_noise_is_finite() {
        let (m, b) = fig();
        let tiny = m.scaled(1e-6);
        let p = gbm_exact_hit_prob(&tiny, &b, Horizon::Finite(5.0)).unwrap();
        assert_eq!(p.prob, 0.0);
        assert!(p.log_prob.is_finite() && p.log_prob < -1e4);
        let ld = gbm_rate_finite(&tiny, &b, 5.0).unwrap().rate;
        assert!((-p.log_prob / ld - 1.0).abs() < 1e-2);
    }

    #[test]
    fn exact_vs_ld_at_small_eps() {
        let (m, b) = fig();
        let rate = gbm_rate_infinite(&m, &b).unwrap().rate;
        let p = gbm_exact_hit_prob(&m.scaled(1e-3), &b, Horizon::Infinite).unwrap();
        assert!((-1e-3 * p.log_prob - rate).abs() < 1e-2 * rate);
    }

    #[test]
    fn validation() {
        let m = GbmModel::new(1.0, 0.5, 1.0);
        for b in [
            ExpBoundary::upper(0.9, 1.1),
            ExpBoundary::upper(1.3, 0.9),
            ExpBoundary::lower(0.5, 0.5),
        ] {
            assert!(gbm_rate_infinite(&m, &b).unwrap_err().is_validation());
        }
        let (_, b) = fig();
        assert!(gbm_rate_infinite(&GbmModel::new(1.0, 0.0, 1.0), &b).is_err());
    }

    #[test]
    fn corr_rate_and_exponents() {
        let p = pair();
        let sol = corr_gbm_rate(&p).unwrap();
        let d = 0.09 + 0.04 - 2.0 * 0.5 * 0.3 * 0.2;
        assert!((sol.rate - 2.0 * 0.5 * 2.0_f64.ln() / d).abs() < 1e-14);
        assert!((sol.horizon - 2.0_f64.ln() / 0.5).abs() < 1e-14);
        // straight log-lines meet at the horizon
        let gap = (p.x0 / p.y0).ln() + (sol.c1 - sol.c2) * sol.horizon;
        assert!(gap.abs() < 1e-12);
        // and achieve the rate under the inverse covariance
        let (v1, v2) = (sol.c1 - p.alpha, sol.c2 - p.beta);
        let det = p.sigma * p.sigma * p.b * p.b * (1.0 - p.rho * p.rho);
        let quad = (p.b * p.b * v1 * v1 - 2.0 * p.rho * p.sigma * p.b * v1 * v2 + p.sigma * p.sigma * v2 * v2) / det;
        assert!((sol.horizon * quad / 2.0 - sol.rate).abs() < 1e-12 * sol.rate);
        let zero = corr_gbm_rate(&CorrGbmPair { rho: 0.0, ..p }).unwrap();
        assert!((zero.rate - 2.0 * 0.5 * 2.0_f64.ln() / 0.13).abs() < 1e-14);
    }

    #[test]
    fn corr_rate_depends_on_relative_variance_only() {
        let a = CorrGbmPair { sigma: 0.3, b: 0.2, rho: 0.5, ..pair() };
        // same σ² + b² − 2ρbσ = 0.07
        let rho = (0.1225 + 0.0625 - 0.07) / (2.0 * 0.35 * 0.25);
        let b = CorrGbmPair { sigma: 0.35, b: 0.25, rho, ..pair() };
        let (ra, rb) = (corr_gbm_rate(&a).unwrap(), corr_gbm_rate(&b).unwrap());
        assert!((ra.rate - rb.rate).abs() < 1e-12 * ra.rate);
    }

    #[test]
    fn corr_degenerate_and_drift_errors() {
        let p = CorrGbmPair { rho: 1.0, sigma: 0.3, b: 0.3, ..pair() };
        assert!(matches!(corr_gbm_rate(&p), Err(Error::DegenerateNoise(_))));
        let q = CorrGbmPair { alpha: 0.51, sigma: 1.0, b: 0.1, rho: 0.0, ..pair() };
        assert!(matches!(corr_gbm_exact(&q, 1.0), Err(Error::DriftNotPositive(_))));
    }

    #[test]
    fn corr_exact_limits() {
        let p = pair();
        let rate = corr_gbm_rate(&p).unwrap().rate;
        let ex = corr_gbm_exact(&p, 1e-12).unwrap();
        assert!((-1e-12 * ex.log_prob - rate).abs() < 1e-9 * rate);
        let close = corr_gbm_exact(&CorrGbmPair { x0: 1.0 + 1e-12, ..p }, 1.0).unwrap();
        assert!((close.prob - 1.0).abs() < 1e-9);
    }
}
