//! Brute-force check on the closed forms: the action functionals are
//! discretised on a uniform grid and minimised directly.
//!
//! On cell `i` the residual is `d_i = a x_{i+1} − c x_i − q`, i.e.
//! `(x_{i+1} − x_i)/h − μ (x_i + x_{i+1})/2 − r`, and the discrete action is
//! `(h/2σ²) Σ d_i²`. It is quadratic in the interior values, whose normal
//! equations form a symmetric positive-definite tridiagonal system. GBM
//! problems are solved for `log x` with `μ = 0` in the stencil and drift `q`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::ExpBoundary;
use crate::error::{ensure, Error, Result};
use crate::numerics::solve_tridiagonal;
use crate::ou_rates::respects_boundary;
use crate::path::{uniform_grid, SampledPath};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ActionKind {
    /// `(1/2σ²) ∫ (x' − μx − r)² dt`.
    OuLinear { mu: f64, r: f64, sigma: f64 },
    /// `(1/2σ²) ∫ ((log x)' − μ)² dt`.
    GbmLog { mu: f64, sigma: f64 },
    /// `∫ (x' − αx)²/(2σ²) + (y' − βy)²/(2b²) dt`.
    TwoOu { alpha: f64, beta: f64, sigma: f64, b: f64 },
    /// `(1/2) ∫ vᵀ Σ⁻¹ v dt` with `v = ((log x)' − α, (log y)' − β)` and
    /// `Σ` the covariance of `(σW, bB)`.
    CorrGbm { alpha: f64, beta: f64, sigma: f64, b: f64, rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Endpoint {
    Fixed(f64),
    /// End on the curve at the action's horizon.
    FreeOnCurve(ExpBoundary),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteAction {
    pub horizon: f64,
    pub n: usize,
    pub kind: ActionKind,
    pub left: f64,
    pub right: Endpoint,
}

/// One component of a path action in stencil form.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    a: f64,
    c: f64,
    q: f64,
    log_space: bool,
}

impl Stencil {
    fn new(mu: f64, q: f64, log_space: bool, h: f64) -> Self {
        Self {
            a: 1.0 / h - mu / 2.0,
            c: 1.0 / h + mu / 2.0,
            q,
            log_space,
        }
    }

    fn to_internal(&self, x: f64) -> Result<f64> {
        if self.log_space {
            ensure(x > 0.0, || format!("log-space path needs positive values, got {x}"))?;
            Ok(x.ln())
        } else {
            Ok(x)
        }
    }

    fn to_external(&self, x: f64) -> f64 {
        if self.log_space {
            x.exp()
        } else {
            x
        }
    }

    fn residuals(&self, x: &[f64]) -> Vec<f64> {
        x.windows(2).map(|w| self.a * w[1] - self.c * w[0] - self.q).collect()
    }

    /// Minimiser of `Σ d_i²` over the interior with both ends fixed.
    fn minimise(&self, left: f64, right: f64, n: usize, q: f64) -> Result<Vec<f64>> {
        let (a, c) = (self.a, self.c);
        let m = n - 1;
        let diag = vec![a * a + c * c; m];
        let off = vec![-a * c; m - 1];
        let mut rhs = vec![(a - c) * q; m];
        rhs[0] += a * c * left;
        rhs[m - 1] += a * c * right;
        let interior = solve_tridiagonal(&off, &diag, &off, &rhs)?;
        let mut x = Vec::with_capacity(n + 1);
        x.push(left);
        x.extend(interior);
        x.push(right);
        Ok(x)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    ensure(v > 0.0 && v.is_finite(), || format!("{name} must be positive, got {v}"))
}

fn single_stencil(kind: &ActionKind, h: f64) -> Result<(Stencil, f64)> {
    match *kind {
        ActionKind::OuLinear { mu, r, sigma } => {
            positive("sigma", sigma)?;
            ensure(mu.is_finite() && r.is_finite(), || "mu and r must be finite".into())?;
            Ok((Stencil::new(mu, r, false, h), sigma))
        }
        ActionKind::GbmLog { mu, sigma } => {
            positive("sigma", sigma)?;
            ensure(mu.is_finite(), || "mu must be finite".into())?;
            Ok((Stencil::new(0.0, mu, true, h), sigma))
        }
        _ => Err(Error::InvalidParameters("expected a single-path action".into())),
    }
}

/// Two stencils and the inverse covariance `[m11, m12, m22]`.
fn pair_stencils(kind: &ActionKind, h: f64) -> Result<(Stencil, Stencil, [f64; 3])> {
    match *kind {
        ActionKind::TwoOu { alpha, beta, sigma, b } => {
            positive("sigma", sigma)?;
            positive("b", b)?;
            ensure(alpha.is_finite() && beta.is_finite(), || "drifts must be finite".into())?;
            Ok((
                Stencil::new(alpha, 0.0, false, h),
                Stencil::new(beta, 0.0, false, h),
                [1.0 / (sigma * sigma), 0.0, 1.0 / (b * b)],
            ))
        }
        ActionKind::CorrGbm { alpha, beta, sigma, b, rho } => {
            positive("sigma", sigma)?;
            positive("b", b)?;
            ensure(rho.abs() < 1.0, || format!("need |rho| < 1, got {rho}"))?;
            let k = 1.0 / (1.0 - rho * rho);
            Ok((
                Stencil::new(0.0, alpha, true, h),
                Stencil::new(0.0, beta, true, h),
                [k / (sigma * sigma), -k * rho / (sigma * b), k / (b * b)],
            ))
        }
        _ => Err(Error::InvalidParameters("expected a two-path action".into())),
    }
}

fn check_grid(horizon: f64, n: usize) -> Result<()> {
    positive("horizon", horizon)?;
    ensure(n >= 2, || format!("need at least 2 grid intervals, got {n}"))
}

/// Minimiser of the discrete action with both endpoints fixed, and its value.
pub fn minimize_fixed_endpoints(action: &DiscreteAction) -> Result<(SampledPath, f64)> {
    check_grid(action.horizon, action.n)?;
    let h = action.horizon / action.n as f64;
    let (st, sigma) = single_stencil(&action.kind, h)?;
    let right = match action.right {
        Endpoint::Fixed(v) => v,
        Endpoint::FreeOnCurve(bound) => bound.value(action.horizon),
    };
    let x = st.minimise(st.to_internal(action.left)?, st.to_internal(right)?, action.n, st.q)?;
    let value = h / (2.0 * sigma * sigma) * st.residuals(&x).iter().map(|d| d * d).sum::<f64>();
    let mut path = SampledPath {
        times: uniform_grid(action.horizon, action.n),
        values: x.iter().map(|&v| st.to_external(v)).collect(),
    };
    // keep the prescribed endpoints bit-exact after the log round trip
    path.values[0] = action.left;
    path.values[action.n] = right;
    Ok((path, value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeTimeResult {
    pub t_star: f64,
    pub value: f64,
    pub path: SampledPath,
    /// Whether the minimiser stays strictly on the start side of the curve
    /// before `t_star`. Checked after the fact, never imposed.
    pub respects_boundary: bool,
}

const GOLDEN_TOL: f64 = 1e-6;

fn golden_section(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > GOLDEN_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scans `n_t` equally spaced horizons in `t_range`, then refines the best
/// one by golden section to `1e-6`.
fn scan_then_refine(f: impl Fn(f64) -> Result<f64> + Sync, t_range: (f64, f64), n_t: usize) -> Result<f64> {
    let (lo, hi) = t_range;
    ensure(0.0 < lo && lo < hi && hi.is_finite(), || format!("need 0 < lo < hi, got [{lo}, {hi}]"))?;
    ensure(n_t >= 3, || format!("need at least 3 scan points, got {n_t}"))?;
    let grid: Vec<f64> = (0..n_t).map(|k| lo + (hi - lo) * k as f64 / (n_t - 1) as f64).collect();
    let values = grid.par_iter().map(|&t| f(t)).collect::<Result<Vec<f64>>>()?;
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(n_t - 1)];
    golden_section(&f, a, b)
}

/// Minimises the fixed-endpoint discrete value over horizons `T`, with the
/// right end on `bound` at `T`.
pub fn minimize_free_time(
    kind: &ActionKind,
    left: f64,
    bound: &ExpBoundary,
    t_range: (f64, f64),
    n_t: usize,
    n: usize,
) -> Result<FreeTimeResult> {
    let at = |t: f64| DiscreteAction {
        horizon: t,
        n,
        kind: *kind,
        left,
        right: Endpoint::FreeOnCurve(*bound),
    };
    let t_star = scan_then_refine(|t| minimize_fixed_endpoints(&at(t)).map(|r| r.1), t_range, n_t)?;
    let (path, value) = minimize_fixed_endpoints(&at(t_star))?;
    Ok(FreeTimeResult {
        t_star,
        value,
        respects_boundary: respects_boundary(&path, bound),
        path,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPathResult {
    pub x: SampledPath,
    pub y: SampledPath,
    pub value: f64,
    pub horizon: f64,
    /// Shared terminal value `x(T) = y(T)`.
    pub meet: f64,
}

/// Joint minimiser over both paths with a shared free terminal value.
///
/// Each path is `base + z·unit` in the terminal value `z`, so the total
/// action is a quadratic in `z` and is minimised in closed form.
pub fn minimize_two_path(kind: &ActionKind, horizon: f64, n: usize, x0: f64, y0: f64) -> Result<TwoPathResult> {
    check_grid(horizon, n)?;
    let h = horizon / n as f64;
    let (sx, sy, [m11, m12, m22]) = pair_stencils(kind, h)?;
    let (ix0, iy0) = (sx.to_internal(x0)?, sy.to_internal(y0)?);

    let split = |st: &Stencil, start: f64| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        let base = st.minimise(start, 0.0, n, st.q)?;
        let unit = st.minimise(0.0, 1.0, n, 0.0)?;
        let d0 = st.residuals(&base);
        let d1: Vec<f64> = unit.windows(2).map(|w| st.a * w[1] - st.c * w[0]).collect();
        Ok((base, unit, d0, d1))
    };
    let (xb, xu, dx0, dx1) = split(&sx, ix0)?;
    let (yb, yu, dy0, dy1) = split(&sy, iy0)?;

    // S(z) = (h/2) Σ m11 ex² + 2 m12 ex ey + m22 ey², e = d0 + z d1
    let (mut qa, mut qb) = (0.0, 0.0);
    for i in 0..n {
        qa += m11 * dx1[i] * dx1[i] + 2.0 * m12 * dx1[i] * dy1[i] + m22 * dy1[i] * dy1[i];
        qb += 2.0 * (m11 * dx0[i] * dx1[i] + m12 * (dx0[i] * dy1[i] + dy0[i] * dx1[i]) + m22 * dy0[i] * dy1[i]);
    }
    let z = -qb / (2.0 * qa);
    let mut value = 0.0;
    for i in 0..n {
        let ex = dx0[i] + z * dx1[i];
        let ey = dy0[i] + z * dy1[i];
        value += m11 * ex * ex + 2.0 * m12 * ex * ey + m22 * ey * ey;
    }
    value *= h / 2.0;

    let times = uniform_grid(horizon, n);
    let assemble = |st: &Stencil, base: &[f64], unit: &[f64]| -> Vec<f64> {
        base.iter().zip(unit).map(|(b, u)| st.to_external(b + z * u)).collect()
    };
    let mut xv = assemble(&sx, &xb, &xu);
    let mut yv = assemble(&sy, &yb, &yu);
    xv[0] = x0;
    yv[0] = y0;
    let meet = sx.to_external(z);
    xv[n] = meet;
    yv[n] = meet;
    Ok(TwoPathResult {
        x: SampledPath { times: times.clone(), values: xv },
        y: SampledPath { times, values: yv },
        value,
        horizon,
        meet,
    })
}

/// [`minimize_two_path`] with the horizon scanned and refined.
pub fn minimize_two_path_free_time(
    kind: &ActionKind,
    x0: f64,
    y0: f64,
    t_range: (f64, f64),
    n_t: usize,
    n: usize,
) -> Result<TwoPathResult> {
    let t_star = scan_then_refine(|t| minimize_two_path(kind, t, n, x0, y0).map(|r| r.value), t_range, n_t)?;
    minimize_two_path(kind, t_star, n, x0, y0)
}

fn grid_step(path: &SampledPath) -> Result<f64> {
    ensure(path.len() >= 3, || format!("need at least 3 samples, got {}", path.len()))?;
    Ok(path.horizon() / (path.len() - 1) as f64)
}

/// Second-order derivative estimates at the nodes of a uniform grid.
fn derivative(x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len() - 1;
    let mut d = Vec::with_capacity(n + 1);
    d.push((-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * h));
    for i in 1..n {
        d.push((x[i + 1] - x[i - 1]) / (2.0 * h));
    }
    d.push((3.0 * x[n] - 4.0 * x[n - 1] + x[n - 2]) / (2.0 * h));
    d
}

fn trapezoid(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    h * (f[1..n].iter().sum::<f64>() + 0.5 * (f[0] + f[n]))
}

fn internal_values(path: &SampledPath, log_space: bool) -> Result<Vec<f64>> {
    if log_space {
        ensure(path.values.iter().all(|&v| v > 0.0), || "log-space path needs positive values".into())?;
        Ok(path.values.iter().map(|v| v.ln()).collect())
    } else {
        Ok(path.values.clone())
    }
}

/// Integrand `(x' − drift(x))` of a single-path action and its `σ`.
fn single_defect(path: &SampledPath, kind: &ActionKind) -> Result<(Vec<f64>, f64)> {
    let h = grid_step(path)?;
    match *kind {
        ActionKind::OuLinear { mu, r, sigma } => {
            positive("sigma", sigma)?;
            let d = derivative(&path.values, h);
            Ok((d.iter().zip(&path.values).map(|(dx, x)| dx - mu * x - r).collect(), sigma))
        }
        ActionKind::GbmLog { mu, sigma } => {
            positive("sigma", sigma)?;
            let lx = internal_values(path, true)?;
            Ok((derivative(&lx, h).iter().map(|d| d - mu).collect(), sigma))
        }
        _ => Err(Error::InvalidParameters("expected a single-path action".into())),
    }
}

/// Trapezoid-rule value of the action along a sampled path, with
/// second-order finite-difference derivatives.
pub fn action_quadrature(path: &SampledPath, kind: &ActionKind) -> Result<f64> {
    let (defect, sigma) = single_defect(path, kind)?;
    let f: Vec<f64> = defect.iter().map(|d| d * d / (2.0 * sigma * sigma)).collect();
    Ok(trapezoid(&f, grid_step(path)?))
}

/// As [`action_quadrature`] for the two-path actions. Both paths must share
/// one grid.
pub fn action_quadrature_pair(x: &SampledPath, y: &SampledPath, kind: &ActionKind) -> Result<f64> {
    ensure(x.times == y.times, || "paths must share a time grid".into())?;
    let h = grid_step(x)?;
    let (_, _, [m11, m12, m22]) = pair_stencils(kind, h)?;
    let (drift_x, drift_y, log) = match *kind {
        ActionKind::TwoOu { alpha, beta, .. } => (alpha, beta, false),
        ActionKind::CorrGbm { alpha, beta, .. } => (alpha, beta, true),
        _ => unreachable!("pair_stencils accepted a single-path kind"),
    };
    let ix = internal_values(x, log)?;
    let iy = internal_values(y, log)?;
    let (dx, dy) = (derivative(&ix, h), derivative(&iy, h));
    let f: Vec<f64> = (0..ix.len())
        .map(|i| {
            let (ex, ey) = if log {
                (dx[i] - drift_x, dy[i] - drift_y)
            } else {
                (dx[i] - drift_x * ix[i], dy[i] - drift_y * iy[i])
            };
            0.5 * (m11 * ex * ex + 2.0 * m12 * ex * ey + m22 * ey * ey)
        })
        .collect();
    Ok(trapezoid(&f, h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub base: f64,
    pub min_increase: f64,
    pub n_perturbations: usize,
    pub all_worse: bool,
}

const PERTURB_MODES: usize = 4;
const PERTURB_SCALE: f64 = 0.05;

/// Random smooth bump `Σ_k c_k sin(kπt/T)`, zero at both ends.
fn bump(rng: &mut ChaCha8Rng, times: &[f64], scale: f64) -> Vec<f64> {
    let t_end = *times.last().expect("non-empty grid");
    let coeffs: Vec<f64> = (1..=PERTURB_MODES)
        .map(|k| scale * rng.random_range(-1.0..1.0) / k as f64)
        .collect();
    let mut out: Vec<f64> = times
        .iter()
        .map(|&t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * t / t_end).sin())
                .sum()
        })
        .collect();
    let n = out.len() - 1;
    out[0] = 0.0;
    out[n] = 0.0;
    out
}

fn perturbed(path: &SampledPath, delta: &[f64], log: bool) -> SampledPath {
    let values = path
        .values
        .iter()
        .zip(delta)
        .map(|(&v, &d)| if log { v * d.exp() } else { v + d })
        .collect();
    SampledPath {
        times: path.times.clone(),
        values,
    }
}

fn amplitude(values: &[f64], log: bool) -> f64 {
    if log {
        PERTURB_SCALE
    } else {
        PERTURB_SCALE * values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-3)
    }
}

fn certificate(base: f64, perturbed_values: Vec<f64>) -> Certificate {
    let min_increase = perturbed_values
        .iter()
        .map(|v| v - base)
        .fold(f64::INFINITY, f64::min);
    Certificate {
        base,
        min_increase,
        n_perturbations: perturbed_values.len(),
        all_worse: min_increase > 0.0,
    }
}

/// Evaluates the action on `count` random perturbations of `path` that
/// vanish at both ends; an optimal path makes every one strictly worse.
pub fn perturbation_certificate(path: &SampledPath, kind: &ActionKind, count: usize, seed: u64) -> Result<Certificate> {
    let base = action_quadrature(path, kind)?;
    let log = matches!(kind, ActionKind::GbmLog { .. });
    let scale = amplitude(&path.values, log);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..count)
        .map(|_| {
            let d = bump(&mut rng, &path.times, scale);
            action_quadrature(&perturbed(path, &d, log), kind)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(certificate(base, values))
}

/// Pair version of [`perturbation_certificate`]; both paths are perturbed
/// and still meet at the end.
pub fn perturbation_certificate_pair(
    x: &SampledPath,
    y: &SampledPath,
    kind: &ActionKind,
    count: usize,
    seed: u64,
) -> Result<Certificate> {
    let base = action_quadrature_pair(x, y, kind)?;
    let log = matches!(kind, ActionKind::CorrGbm { .. });
    let (ax, ay) = (amplitude(&x.values, log), amplitude(&y.values, log));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..count)
        .map(|_| {
            let dx = bump(&mut rng, &x.times, ax);
            let dy = bump(&mut rng, &y.times, ay);
            action_quadrature_pair(&perturbed(x, &dx, log), &perturbed(y, &dy, log), kind)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(certificate(base, values))
}
