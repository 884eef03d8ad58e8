//! Meeting problem for two independent OU processes
//! `dX = αX dt + σ dW`, `dY = βY dt + b dB`, with `X(0) = x0 > y0 = Y(0)`.
//!
//! The extremals are `x(t) = C1 e^{αt} + C2 e^{−αt}` and
//! `y(t) = C3 e^{βt} + C4 e^{−βt}`, meeting at a free time `T` at a free
//! point. The free end gives momentum balance and a vanishing Hamiltonian,
//! which together with the start values fix all five unknowns.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::numerics::{expand_bracket, find_root_default};
use crate::ou_rates::Residuals;
use crate::path::SampledPath;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoOuModel {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
}

impl TwoOuModel {
    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.sigma, self.b, self.x0, self.y0];
        ensure(all.iter().all(|v| v.is_finite()), || "parameters must be finite".into())?;
        ensure(0.0 < self.beta && self.beta < self.alpha, || {
            format!("need 0 < beta < alpha, got beta={}, alpha={}", self.beta, self.alpha)
        })?;
        ensure(self.sigma > 0.0 && self.b > 0.0, || {
            format!("noise scales must be positive, got sigma={}, b={}", self.sigma, self.b)
        })?;
        ensure(0.0 < self.y0 && self.y0 < self.x0, || {
            format!("need 0 < y0 < x0, got y0={}, x0={}", self.y0, self.x0)
        })
    }

    fn k(&self) -> f64 {
        self.beta * self.sigma * self.sigma + self.alpha * self.b * self.b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingSolution {
    pub rate: f64,
    pub meet_time: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub residuals: Residuals,
}

impl MeetingSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn x(&self, alpha: f64, t: f64) -> f64 {
        self.c1 * (alpha * t).exp() + self.c2 * (-alpha * t).exp()
    }

    pub fn y(&self, beta: f64, t: f64) -> f64 {
        self.c3 * (beta * t).exp() + self.c4 * (-beta * t).exp()
    }
}

/// Meeting-time equation
/// `(α−β)(y0 βσ² e^{αT} + x0 α b² e^{βT}) + (βσ² + αb²)(y0 β e^{−αT} − x0 α e^{−βT}) = 0`.
/// Negative at 0, increasing, unbounded.
pub fn meeting_equation(m: &TwoOuModel, t: f64) -> f64 {
    let (a, be, s2, b2) = (m.alpha, m.beta, m.sigma * m.sigma, m.b * m.b);
    (a - be) * (m.y0 * be * s2 * (a * t).exp() + m.x0 * a * b2 * (be * t).exp())
        + m.k() * (m.y0 * be * (-a * t).exp() - m.x0 * a * (-be * t).exp())
}

pub fn solve_meeting_time(model: &TwoOuModel) -> Result<f64> {
    model.validate()?;
    let f = |t| meeting_equation(model, t);
    find_root_default(f, expand_bracket(f, 1e-6)?)
}

/// Coefficients at meeting time `t`, written so that `b → 0` stays finite.
fn coefficients(m: &TwoOuModel, t: f64) -> [f64; 4] {
    let (a, be, s2, b2, k) = (m.alpha, m.beta, m.sigma * m.sigma, m.b * m.b, m.k());
    let ea = (-a * t).exp();
    let eb = (-be * t).exp();
    let ea_p = (a * t).exp();
    let eb_p = (be * t).exp();
    let d1 = k * ea + (a - be) * s2 * ea_p;
    let d2 = k * eb + (be - a) * b2 * eb_p;
    [
        m.x0 * k * ea / d1,
        m.x0 * (a - be) * s2 * ea_p / d1,
        m.y0 * k * eb / d2,
        m.y0 * (be - a) * b2 * eb_p / d2,
    ]
}

/// Rate at meeting time `t` in consolidated form:
/// `α(α−β)²σ² x0² (1−e^{−2αT}) / ((α−β)σ² + K e^{−2αT})²
///  + β(α−β)² b² y0² (1−e^{−2βT}) / ((β−α)b² + K e^{−2βT})²`, `K = βσ² + αb²`.
fn consolidated_rate(m: &TwoOuModel, t: f64) -> f64 {
    let (a, be, s2, b2, k) = (m.alpha, m.beta, m.sigma * m.sigma, m.b * m.b, m.k());
    let g2 = (a - be) * (a - be);
    let qx = (a - be) * s2 + k * (-2.0 * a * t).exp();
    let qy = (be - a) * b2 + k * (-2.0 * be * t).exp();
    a * g2 * s2 * m.x0 * m.x0 * -(-2.0 * a * t).exp_m1() / (qx * qx)
        + be * g2 * b2 * m.y0 * m.y0 * -(-2.0 * be * t).exp_m1() / (qy * qy)
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `x'(T) − y'(T) = −x0 α(α−β)(σ² + b²) / ((αb² + βσ²) e^{−αT} + σ²(α−β) e^{αT})`.
pub fn slope_gap(m: &TwoOuModel, t: f64) -> f64 {
    let (a, be, s2, b2) = (m.alpha, m.beta, m.sigma * m.sigma, m.b * m.b);
    -m.x0 * a * (a - be) * (s2 + b2) / (m.k() * (-a * t).exp() + s2 * (a - be) * (a * t).exp())
}

pub fn meeting_solution(model: &TwoOuModel) -> Result<MeetingSolution> {
    let t = solve_meeting_time(model)?;
    let m = model;
    let [c1, c2, c3, c4] = coefficients(m, t);
    let (a, be, s2, b2) = (m.alpha, m.beta, m.sigma * m.sigma, m.b * m.b);
    let rate = consolidated_rate(m, t);
    let first_form = a * c2 * c2 * -(-2.0 * a * t).exp_m1() / s2 + be * c4 * c4 * -(-2.0 * be * t).exp_m1() / b2;

    let r = a / be;
    let g = (a - be) * t;
    let x_t = c1 * (a * t).exp() + c2 * (-a * t).exp();
    let y_t = c3 * (be * t).exp() + c4 * (-be * t).exp();
    let xp = a * (c1 * (a * t).exp() - c2 * (-a * t).exp());
    let yp = be * (c3 * (be * t).exp() - c4 * (-be * t).exp());
    let px = (xp - a * x_t) / s2;
    let py = (yp - be * y_t) / b2;
    let h_scale = (s2 * px * px).max(b2 * py * py);
    let hamiltonian = s2 * px * px / 2.0 + a * x_t * px + b2 * py * py / 2.0 + be * y_t * py;

    let mut res = Residuals::new();
    res.insert("start_x".into(), rel(c1 + c2, m.x0));
    res.insert(
        "start_y".into(),
        rel(r * g.exp() * c1 - r * (b2 / s2) * (-g).exp() * c2, m.y0),
    );
    res.insert(
        "meeting_point".into(),
        rel(
            c1 * (a * t).exp() + c2 * (-a * t).exp(),
            r * (a * t).exp() * c1 - r * (b2 / s2) * (-a * t).exp() * c2,
        ),
    );
    res.insert("c3_link".into(), rel(c3, r * g.exp() * c1));
    res.insert("c4_link".into(), rel(c4, -r * (b2 / s2) * (-g).exp() * c2));
    res.insert("paths_meet".into(), rel(x_t, y_t));
    res.insert("momentum_balance".into(), (px + py).abs() / px.abs().max(py.abs()));
    res.insert("hamiltonian".into(), hamiltonian.abs() / h_scale);
    res.insert("rate_first_form".into(), rel(rate, first_form));
    res.insert("slope_gap".into(), rel(xp - yp, slope_gap(m, t)));
    res.insert("equation_abs".into(), meeting_equation(m, t));
    Ok(MeetingSolution {
        rate,
        meet_time: t,
        c1,
        c2,
        c3,
        c4,
        residuals: res,
    })
}

/// Both extremals on `n + 1` equally spaced points of `[0, T]`.
pub fn meeting_paths(model: &TwoOuModel, n: usize) -> Result<(SampledPath, SampledPath)> {
    ensure(n >= 2, || format!("need at least 2 intervals, got {n}"))?;
    let sol = meeting_solution(model)?;
    let t = sol.meet_time;
    let x = SampledPath::from_fn(t, n, |s| sol.x(model.alpha, s));
    let y = SampledPath::from_fn(t, n, |s| sol.y(model.beta, s));
    Ok((x, y))
}
