//! Crude Monte Carlo for the hitting problems, the deterministic time change
//! that maps the OU problem to Brownian motion between two curves, and the
//! two-sided Brownian survival series.
//!
//! Path `i` of a run draws from a ChaCha8 stream selected by `(seed, i)`, so
//! results do not depend on how paths are spread over threads. Crossings are
//! detected on the grid unless [`Monitor::Bridge`] is selected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{ExpBoundary, Side};
use crate::error::{ensure, Error, Result};
use crate::gbm_rates::{CorrGbmPair, GbmModel};
use crate::numerics::normal_cdf;
use crate::ou_rates::OuModel;
use crate::path::{uniform_grid, SampledPath};

/// `min(1e-3, horizon/10⁴)`.
pub fn default_step(horizon: f64) -> f64 {
    (horizon / 1e4).min(1e-3)
}

/// How crossings between simulated points are detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monitor {
    /// Only the simulated grid points are checked.
    #[default]
    Grid,
    /// Grid check plus a Brownian-bridge crossing draw on each step. Exact
    /// for GBM and the pair (straight boundaries in log space), first order
    /// in the step for curved OU boundaries.
    Bridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub step: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub monitor: Monitor,
}

impl SimConfig {
    pub fn new(horizon: f64, n_paths: usize, seed: u64) -> Self {
        Self {
            step: default_step(horizon),
            horizon,
            n_paths,
            seed,
            monitor: Monitor::Grid,
        }
    }

    pub fn with_monitor(mut self, monitor: Monitor) -> Self {
        self.monitor = monitor;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.step > 0.0 && self.step < self.horizon) {
            return bad(format!("need 0 < step < horizon, got step={}", self.step));
        }
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if self.horizon / self.step > 1e9 {
            return bad(format!("too many steps per path: {}", self.horizon / self.step));
        }
        Ok(())
    }

    /// Number of grid intervals; the step actually used is `horizon / n_steps`.
    pub fn n_steps(&self) -> usize {
        ((self.horizon / self.step).round() as usize).max(1)
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub n_hits: usize,
}

impl McEstimate {
    pub fn from_counts(n_hits: usize, n_paths: usize) -> Self {
        let p = n_hits as f64 / n_paths as f64;
        Self {
            p_hat: p,
            stderr: (p * (1.0 - p) / n_paths as f64).sqrt(),
            n_paths,
            n_hits,
        }
    }

    /// Distance to `p` in units of the combined standard error.
    pub fn z_score(&self, p: f64) -> f64 {
        let se = self.stderr.max((p * (1.0 - p) / self.n_paths as f64).sqrt());
        if se == 0.0 {
            if self.p_hat == p {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.p_hat - p) / se
        }
    }
}

/// Independent random stream for path `index` of a run seeded by `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Exact one-step OU transition `x ↦ a x + c + s Z`.
fn ou_transition(mu: f64, r: f64, sigma: f64, h: f64) -> (f64, f64, f64) {
    if mu == 0.0 {
        return (1.0, r * h, sigma * h.sqrt());
    }
    let a = (mu * h).exp();
    let c = r / mu * (mu * h).exp_m1();
    let s = sigma * ((2.0 * mu * h).exp_m1() / (2.0 * mu)).sqrt();
    (a, c, s)
}

fn check_ou(model: &OuModel) -> Result<()> {
    let ok = model.mu.is_finite() && model.r.is_finite() && model.x0.is_finite();
    ensure(ok, || "OU parameters must be finite".into())?;
    ensure(model.sigma >= 0.0 && model.sigma.is_finite(), || {
        format!("sigma must be non-negative, got {}", model.sigma)
    })
}

fn check_gbm(model: &GbmModel) -> Result<()> {
    ensure(model.mu.is_finite() && model.x0 > 0.0 && model.x0.is_finite(), || {
        "GBM needs finite mu and positive x0".into()
    })?;
    ensure(model.sigma >= 0.0 && model.sigma.is_finite(), || {
        format!("sigma must be non-negative, got {}", model.sigma)
    })
}

fn check_pair(pair: &CorrGbmPair) -> Result<()> {
    let all = [pair.alpha, pair.beta, pair.sigma, pair.b, pair.rho, pair.x0, pair.y0];
    ensure(all.iter().all(|v| v.is_finite()), || "parameters must be finite".into())?;
    ensure(pair.sigma >= 0.0 && pair.b >= 0.0, || "noise scales must be non-negative".into())?;
    ensure(pair.x0 > 0.0 && pair.y0 > 0.0, || "start values must be positive".into())?;
    ensure(pair.rho.abs() <= 1.0, || format!("need |rho| <= 1, got {}", pair.rho))
}

fn single_path(x0: f64, (a, c, s): (f64, f64, f64), cfg: &SimConfig, index: u64, out: impl Fn(f64) -> f64) -> SampledPath {
    let n = cfg.n_steps();
    let mut rng = path_rng(cfg.seed, index);
    let mut x = x0;
    let mut values = Vec::with_capacity(n + 1);
    values.push(out(x));
    for _ in 0..n {
        x = a * x + c + s * normal(&mut rng);
        values.push(out(x));
    }
    SampledPath {
        times: uniform_grid(cfg.horizon, n),
        values,
    }
}

/// One OU path (stream 0) by the exact transition
/// `X_{t+h} = X_t e^{μh} + (r/μ)(e^{μh} − 1) + σ √((e^{2μh} − 1)/(2μ)) Z`.
pub fn simulate_ou(model: &OuModel, cfg: &SimConfig) -> Result<SampledPath> {
    simulate_ou_path(model, cfg, 0)
}

pub fn simulate_ou_path(model: &OuModel, cfg: &SimConfig, index: u64) -> Result<SampledPath> {
    cfg.validate()?;
    check_ou(model)?;
    let step = ou_transition(model.mu, model.r, model.sigma, cfg.dt());
    Ok(single_path(model.x0, step, cfg, index, |x| x))
}

/// One GBM path (stream 0), exact in log space.
pub fn simulate_gbm(model: &GbmModel, cfg: &SimConfig) -> Result<SampledPath> {
    simulate_gbm_path(model, cfg, 0)
}

pub fn simulate_gbm_path(model: &GbmModel, cfg: &SimConfig, index: u64) -> Result<SampledPath> {
    cfg.validate()?;
    check_gbm(model)?;
    let h = cfg.dt();
    let step = (1.0, (model.mu - model.sigma * model.sigma / 2.0) * h, model.sigma * h.sqrt());
    Ok(single_path(model.x0.ln(), step, cfg, index, f64::exp))
}

/// One correlated pair (stream 0). The second driver is
/// `ρ Z1 + √(1 − ρ²) Z2`.
pub fn simulate_corr_gbm(pair: &CorrGbmPair, cfg: &SimConfig) -> Result<(SampledPath, SampledPath)> {
    simulate_corr_gbm_path(pair, cfg, 0)
}

pub fn simulate_corr_gbm_path(pair: &CorrGbmPair, cfg: &SimConfig, index: u64) -> Result<(SampledPath, SampledPath)> {
    cfg.validate()?;
    check_pair(pair)?;
    let n = cfg.n_steps();
    let p = PairStep::new(pair, cfg.dt());
    let mut rng = path_rng(cfg.seed, index);
    let (mut lx, mut ly) = (pair.x0.ln(), pair.y0.ln());
    let mut xs = vec![pair.x0];
    let mut ys = vec![pair.y0];
    for _ in 0..n {
        (lx, ly) = p.advance(lx, ly, &mut rng);
        xs.push(lx.exp());
        ys.push(ly.exp());
    }
    let times = uniform_grid(cfg.horizon, n);
    Ok((
        SampledPath { times: times.clone(), values: xs },
        SampledPath { times, values: ys },
    ))
}

#[derive(Debug, Clone, Copy)]
struct PairStep {
    dx: f64,
    dy: f64,
    sx: f64,
    sy_common: f64,
    sy_own: f64,
}

impl PairStep {
    fn new(pair: &CorrGbmPair, h: f64) -> Self {
        let rh = h.sqrt();
        Self {
            dx: (pair.alpha - pair.sigma * pair.sigma / 2.0) * h,
            dy: (pair.beta - pair.b * pair.b / 2.0) * h,
            sx: pair.sigma * rh,
            sy_common: pair.b * pair.rho * rh,
            sy_own: pair.b * (1.0 - pair.rho * pair.rho).max(0.0).sqrt() * rh,
        }
    }

    #[inline]
    fn advance(&self, lx: f64, ly: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let z1 = normal(rng);
        let z2 = normal(rng);
        (
            lx + self.dx + self.sx * z1,
            ly + self.dy + self.sy_common * z1 + self.sy_own * z2,
        )
    }
}

/// The event whose probability [`estimate_hit_prob`] estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HitProblem {
    /// OU reaches one exponential curve.
    Ou { model: OuModel, bound: ExpBoundary },
    /// OU leaves the band between two curves.
    OuCorridor {
        model: OuModel,
        lower: ExpBoundary,
        upper: ExpBoundary,
    },
    /// GBM reaches one exponential curve.
    Gbm { model: GbmModel, bound: ExpBoundary },
    /// The correlated pair meets, `X ≤ Y`.
    CorrGbmMeeting { pair: CorrGbmPair },
    /// The OU corridor problem after the time change: Brownian motion from
    /// `x0` leaves the transformed band before `τ(horizon)`.
    TimeChangedCorridor {
        model: OuModel,
        lower: ExpBoundary,
        upper: ExpBoundary,
    },
}

fn start_inside(x0: f64, bound: &ExpBoundary) -> Result<()> {
    ensure(bound.level0 > 0.0 && bound.level0.is_finite() && bound.exponent.is_finite(), || {
        format!("boundary level must be positive, got {}", bound.level0)
    })?;
    match bound.side {
        Side::Lower => ensure(x0 > bound.level0, || {
            format!("lower boundary {} is not below the start {x0}", bound.level0)
        }),
        Side::Upper => ensure(x0 < bound.level0, || {
            format!("upper boundary {} is not above the start {x0}", bound.level0)
        }),
    }
}

fn corridor_sides(lower: &ExpBoundary, upper: &ExpBoundary) -> Result<()> {
    ensure(lower.side == Side::Lower && upper.side == Side::Upper, || {
        "corridor needs a lower and an upper boundary".into()
    })
}

impl HitProblem {
    /// Checks parameters and that the start lies strictly inside the
    /// admissible region.
    pub fn validate(&self) -> Result<()> {
        self.validate_params()?;
        match self {
            HitProblem::Ou { model, bound } => start_inside(model.x0, bound),
            HitProblem::Gbm { model, bound } => start_inside(model.x0, bound),
            HitProblem::OuCorridor { model, lower, upper } | HitProblem::TimeChangedCorridor { model, lower, upper } => {
                start_inside(model.x0, lower)?;
                start_inside(model.x0, upper)
            }
            HitProblem::CorrGbmMeeting { pair } => ensure(pair.x0 > pair.y0, || {
                format!("need x0 > y0, got x0={}, y0={}", pair.x0, pair.y0)
            }),
        }
    }

    fn validate_params(&self) -> Result<()> {
        match self {
            HitProblem::Ou { model, .. } => check_ou(model),
            HitProblem::OuCorridor { model, lower, upper } => {
                check_ou(model)?;
                corridor_sides(lower, upper)
            }
            HitProblem::Gbm { model, .. } => check_gbm(model),
            HitProblem::CorrGbmMeeting { pair } => check_pair(pair),
            HitProblem::TimeChangedCorridor { model, lower, upper } => {
                check_ou(model)?;
                corridor_sides(lower, upper)?;
                ensure(model.r == 0.0, || "time change needs r = 0".into())?;
                TimeChange::new(model.mu, model.sigma).map(|_| ())
            }
        }
    }

    fn prepare(&self, cfg: &SimConfig) -> Prepared {
        let n = cfg.n_steps();
        let h = cfg.dt();
        let times = uniform_grid(cfg.horizon, n);
        let sided = |b: &ExpBoundary, f: &dyn Fn(f64) -> f64| -> (Vec<f64>, Vec<f64>) {
            let vals: Vec<f64> = times.iter().map(|&t| f(t)).collect();
            match b.side {
                Side::Lower => (vals, vec![f64::INFINITY; n + 1]),
                Side::Upper => (vec![f64::NEG_INFINITY; n + 1], vals),
            }
        };
        let bridged = cfg.monitor == Monitor::Bridge;
        let ou_bridge = |model: &OuModel, lo: &[f64], hi: &[f64]| {
            bridged.then(|| Bridge::ou(model, &times, h, lo, hi))
        };
        match *self {
            HitProblem::Ou { model, bound } => {
                let (lo, hi) = sided(&bound, &|t| bound.value(t));
                let bridge = ou_bridge(&model, &lo, &hi);
                Prepared::single(model.x0, ou_transition(model.mu, model.r, model.sigma, h), lo, hi, Output::Identity, bridge)
            }
            HitProblem::OuCorridor { model, lower, upper } => {
                let lo: Vec<f64> = times.iter().map(|&t| lower.value(t)).collect();
                let hi: Vec<f64> = times.iter().map(|&t| upper.value(t)).collect();
                let bridge = ou_bridge(&model, &lo, &hi);
                Prepared::single(model.x0, ou_transition(model.mu, model.r, model.sigma, h), lo, hi, Output::Identity, bridge)
            }
            HitProblem::Gbm { model, bound } => {
                let l0 = bound.level0.ln();
                let (lo, hi) = sided(&bound, &|t| l0 + bound.exponent * t);
                let s2 = model.sigma * model.sigma;
                let bridge = bridged.then(|| Bridge::flat(s2 * h, &lo, &hi));
                let step = (1.0, (model.mu - s2 / 2.0) * h, model.sigma * h.sqrt());
                Prepared::single(model.x0.ln(), step, lo, hi, Output::Exp, bridge)
            }
            HitProblem::CorrGbmMeeting { pair } => {
                let lo = vec![0.0; n + 1];
                let hi = vec![f64::INFINITY; n + 1];
                let theta2 = pair.sigma * pair.sigma + pair.b * pair.b - 2.0 * pair.rho * pair.sigma * pair.b;
                let bridge = bridged.then(|| Bridge::flat(theta2.max(0.0) * h, &lo, &hi));
                Prepared {
                    kind: Kind::Pair {
                        lx0: pair.x0.ln(),
                        ly0: pair.y0.ln(),
                        step: PairStep::new(&pair, h),
                    },
                    lo,
                    hi,
                    times,
                    bridge,
                }
            }
            HitProblem::TimeChangedCorridor { model, lower, upper } => {
                let tc = TimeChange { mu: model.mu, sigma: model.sigma };
                let tau_end = time_change_forward(&tc, cfg.horizon);
                let taus = uniform_grid(tau_end, n);
                let (lo, hi) = transformed_curves(&tc, &lower, &upper, &taus);
                let d_tau = tau_end / n as f64;
                let bridge = bridged.then(|| Bridge::flat(d_tau, &lo, &hi));
                let mut p = Prepared::single(model.x0, (1.0, 0.0, d_tau.sqrt()), lo, hi, Output::Identity, bridge);
                p.times = taus;
                p
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Output {
    Identity,
    Exp,
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Single {
        x0: f64,
        step: (f64, f64, f64),
        output: Output,
    },
    Pair {
        lx0: f64,
        ly0: f64,
        step: PairStep,
    },
}

/// A problem discretised on its grid: the state (or `log x − log y` for
/// the pair) has hit once it is `≤ lo[i]` or `≥ hi[i]`.
struct Prepared {
    kind: Kind,
    lo: Vec<f64>,
    hi: Vec<f64>,
    times: Vec<f64>,
    bridge: Option<Bridge>,
}

/// Coordinates `y_i = w_i v_i − k_i` in which the monitored quantity is a
/// time-changed Brownian motion, the boundaries in those coordinates, and
/// the variance of each step (`var[i]` for the step ending at `i`).
struct Bridge {
    w: Vec<f64>,
    k: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    var: Vec<f64>,
}

impl Bridge {
    fn new(w: Vec<f64>, k: Vec<f64>, var: Vec<f64>, lo: &[f64], hi: &[f64]) -> Self {
        let map = |b: &[f64]| b.iter().zip(w.iter().zip(&k)).map(|(v, (w, k))| v * w - k).collect();
        let (lo, hi) = (map(lo), map(hi));
        Self { w, k, lo, hi, var }
    }

    fn flat(var: f64, lo: &[f64], hi: &[f64]) -> Self {
        let n = lo.len();
        Self::new(vec![1.0; n], vec![0.0; n], vec![var; n], lo, hi)
    }

    /// `Y_t = X_t e^{−μt} − (r/μ)(1 − e^{−μt})` is a martingale with
    /// variance increments `σ²(e^{−2μs} − e^{−2μt})/(2μ)`.
    fn ou(model: &OuModel, times: &[f64], h: f64, lo: &[f64], hi: &[f64]) -> Self {
        let (mu, r, s2) = (model.mu, model.r, model.sigma * model.sigma);
        if mu == 0.0 {
            let k = times.iter().map(|t| r * t).collect();
            return Self::new(vec![1.0; times.len()], k, vec![s2 * h; times.len()], lo, hi);
        }
        let w: Vec<f64> = times.iter().map(|t| (-mu * t).exp()).collect();
        let k = times.iter().map(|t| -r / mu * (-mu * t).exp_m1()).collect();
        let growth = -(-2.0 * mu * h).exp_m1() / (2.0 * mu);
        let mut var: Vec<f64> = w.iter().map(|wi| s2 * wi * wi * growth).collect();
        var.rotate_right(1);
        Self::new(w, k, var, lo, hi)
    }

    /// Probability that the bridge between grid points `i − 1` and `i`
    /// touches a boundary, treating each boundary as linear over the step.
    #[inline]
    fn cross_prob(&self, i: usize, prev: f64, cur: f64) -> f64 {
        let v = self.var[i];
        if v <= 0.0 {
            return 0.0;
        }
        let y0 = prev * self.w[i - 1] - self.k[i - 1];
        let y1 = cur * self.w[i] - self.k[i];
        let mut stay = 1.0;
        if self.lo[i].is_finite() {
            stay *= 1.0 - (-2.0 * (y0 - self.lo[i - 1]) * (y1 - self.lo[i]) / v).exp();
        }
        if self.hi[i].is_finite() {
            stay *= 1.0 - (-2.0 * (self.hi[i - 1] - y0) * (self.hi[i] - y1) / v).exp();
        }
        1.0 - stay
    }
}

impl Prepared {
    fn single(x0: f64, step: (f64, f64, f64), lo: Vec<f64>, hi: Vec<f64>, output: Output, bridge: Option<Bridge>) -> Self {
        let n = lo.len() - 1;
        Self {
            kind: Kind::Single { x0, step, output },
            lo,
            hi,
            times: vec![0.0; n + 1],
            bridge,
        }
    }

    /// Grid check at `i`, then (in bridge mode) a crossing draw for the step
    /// that ended there.
    #[inline]
    fn hit_at(&self, i: usize, prev: f64, v: f64, rng: &mut ChaCha8Rng) -> bool {
        if v <= self.lo[i] || v >= self.hi[i] {
            return true;
        }
        match &self.bridge {
            Some(b) if i > 0 => {
                let u: f64 = rng.random();
                u < b.cross_prob(i, prev, v)
            }
            _ => false,
        }
    }

    /// Runs one path and returns the grid index of the first crossing.
    fn first_hit(&self, rng: &mut ChaCha8Rng, mut record: Option<&mut Vec<f64>>) -> Option<usize> {
        let n = self.lo.len() - 1;
        match self.kind {
            Kind::Single { x0, step: (a, c, s), output } => {
                let out = |x: f64| match output {
                    Output::Identity => x,
                    Output::Exp => x.exp(),
                };
                let mut x = x0;
                for i in 0..=n {
                    let prev = x;
                    if i > 0 {
                        x = a * x + c + s * normal(rng);
                    }
                    if let Some(r) = record.as_deref_mut() {
                        r.push(out(x));
                    }
                    if self.hit_at(i, prev, x, rng) {
                        return Some(i);
                    }
                }
                None
            }
            Kind::Pair { lx0, ly0, step } => {
                let (mut lx, mut ly) = (lx0, ly0);
                for i in 0..=n {
                    let prev = lx - ly;
                    if i > 0 {
                        (lx, ly) = step.advance(lx, ly, rng);
                    }
                    if let Some(r) = record.as_deref_mut() {
                        r.push(lx.exp());
                    }
                    if self.hit_at(i, prev, lx - ly, rng) {
                        return Some(i);
                    }
                }
                None
            }
        }
    }
}

/// Fraction of simulated paths that hit, with its binomial standard error.
pub fn estimate_hit_prob(problem: &HitProblem, cfg: &SimConfig) -> Result<McEstimate> {
    cfg.validate()?;
    problem.validate()?;
    let prepared = problem.prepare(cfg);
    let hits = (0..cfg.n_paths as u64)
        .into_par_iter()
        .filter(|&i| prepared.first_hit(&mut path_rng(cfg.seed, i), None).is_some())
        .count();
    Ok(McEstimate::from_counts(hits, cfg.n_paths))
}

/// The lowest-indexed simulated path that hits, cut at its hitting index.
/// A start already on or past the boundary gives a one-point path.
pub fn extract_extreme_path(problem: &HitProblem, cfg: &SimConfig) -> Result<SampledPath> {
    cfg.validate()?;
    problem.validate_params()?;
    if matches!(problem, HitProblem::CorrGbmMeeting { .. }) {
        return Err(Error::InvalidParameters("path extraction takes a single-process problem".into()));
    }
    let prepared = problem.prepare(cfg);
    let times = match problem {
        HitProblem::TimeChangedCorridor { .. } => prepared.times.clone(),
        _ => uniform_grid(cfg.horizon, cfg.n_steps()),
    };
    const CHUNK: u64 = 1024;
    let total = cfg.n_paths as u64;
    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        let found = (start..end)
            .into_par_iter()
            .find_first(|&i| prepared.first_hit(&mut path_rng(cfg.seed, i), None).is_some());
        if let Some(i) = found {
            let mut values = Vec::new();
            let k = prepared
                .first_hit(&mut path_rng(cfg.seed, i), Some(&mut values))
                .expect("replayed path hits");
            return SampledPath::new(times[..=k].to_vec(), values);
        }
        start = end;
    }
    Err(Error::NoHit(cfg.n_paths))
}

/// Deterministic clock `τ(t) = (σ²/2μ)(1 − e^{−2μt})`, the variance of
/// `∫_0^t σ e^{−μs} dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeChange {
    pub mu: f64,
    pub sigma: f64,
}

impl TimeChange {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        ensure(mu > 0.0 && mu.is_finite(), || format!("mu must be positive, got {mu}"))?;
        ensure(sigma > 0.0 && sigma.is_finite(), || format!("sigma must be positive, got {sigma}"))?;
        Ok(Self { mu, sigma })
    }

    /// `σ²/(2μ)`, the total clock time.
    pub fn limit(&self) -> f64 {
        self.sigma * self.sigma / (2.0 * self.mu)
    }
}

pub fn time_change_forward(tc: &TimeChange, t: f64) -> f64 {
    tc.limit() * -(-2.0 * tc.mu * t).exp_m1()
}

/// `t(τ) = −log(1 − 2μτ/σ²)/(2μ)`.
pub fn time_change_inverse(tc: &TimeChange, tau: f64) -> Result<f64> {
    let limit = tc.limit();
    let z = tau / limit;
    if !(tau >= 0.0) || z >= 1.0 {
        return Err(Error::OutOfRange { value: tau, limit });
    }
    Ok(-(-z).ln_1p() / (2.0 * tc.mu))
}

fn transformed_curves(tc: &TimeChange, lower: &ExpBoundary, upper: &ExpBoundary, taus: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mu = tc.mu;
    let limit = tc.limit();
    let lo = taus
        .iter()
        .map(|&tau| lower.level0 * ((mu - lower.exponent) / (2.0 * mu) * (-tau / limit).ln_1p()).exp())
        .collect();
    let hi = taus
        .iter()
        .map(|&tau| upper.level0 * (-(upper.exponent - mu) / (2.0 * mu) * (-tau / limit).ln_1p()).exp())
        .collect();
    (lo, hi)
}

/// The curves `v0 (1 − 2μτ/σ²)^{(μ−β)/2μ}` and `u0 (1 − 2μτ/σ²)^{−(α−μ)/2μ}`
/// between which a Brownian motion from `x0` must stay; equivalent to the OU
/// staying between `v0 e^{βt}` and `u0 e^{αt}`.
pub fn transformed_boundaries(
    model: &OuModel,
    lower: &ExpBoundary,
    upper: &ExpBoundary,
    tau_grid: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    ensure(model.r == 0.0, || "time change needs r = 0".into())?;
    let tc = TimeChange::new(model.mu, model.sigma)?;
    corridor_sides(lower, upper)?;
    ensure(lower.exponent <= model.mu && model.mu <= upper.exponent, || {
        format!(
            "need beta <= mu <= alpha, got beta={}, mu={}, alpha={}",
            lower.exponent, model.mu, upper.exponent
        )
    })?;
    start_inside(model.x0, lower)?;
    start_inside(model.x0, upper)?;
    let limit = tc.limit();
    if let Some(&bad) = tau_grid.iter().find(|&&t| !(t >= 0.0 && t < limit)) {
        return Err(Error::OutOfRange { value: bad, limit });
    }
    Ok(transformed_curves(&tc, lower, upper, tau_grid))
}

/// `P(−b < W_s < a for all s ≤ t)` for standard Brownian motion from 0,
///
/// `Σ_{n odd} 4/(nπ) sin(nπb/L) exp(−n²π²t/(2L²))`, `L = a + b`,
///
/// summed until the term envelope `4/(nπ) e^{−n²π²t/(2L²)}` drops below
/// `tol`. For very small `t` the method-of-images sum is used instead.
pub fn two_boundary_survival(a: f64, b: f64, t: f64, tol: f64) -> Result<f64> {
    ensure(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(), || {
        format!("barrier distances must be positive, got a={a}, b={b}")
    })?;
    ensure(t > 0.0 && t.is_finite(), || format!("time must be positive, got {t}"))?;
    ensure(tol > 0.0, || format!("tolerance must be positive, got {tol}"))?;
    let l = a + b;
    let pi = std::f64::consts::PI;
    let decay = pi * pi * t / (2.0 * l * l);
    let n_needed = ((4.0 / (pi * tol)).ln().max(1.0) / decay).sqrt();
    if n_needed > 1e6 {
        return Ok(images_survival(a, b, t));
    }
    let mut sum = 0.0;
    let mut n = 1u64;
    loop {
        let nf = n as f64;
        let envelope = 4.0 / (nf * pi) * (-nf * nf * decay).exp();
        sum += envelope * (nf * pi * b / l).sin();
        if envelope < tol {
            break;
        }
        n += 2;
    }
    Ok(sum.clamp(0.0, 1.0))
}

fn images_survival(a: f64, b: f64, t: f64) -> f64 {
    let l = a + b;
    let sd = t.sqrt();
    let phi = |x: f64| normal_cdf(x / sd);
    let mut sum = 0.0;
    for k in -20i32..=20 {
        let s = 2.0 * k as f64 * l;
        sum += phi(a + s) - phi(s - b) - phi(-a - s) + phi(-b - 2.0 * a - s);
    }
    sum.clamp(0.0, 1.0)
}
