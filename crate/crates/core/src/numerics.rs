//! Deterministic numerical building blocks: bracketed root finding, a
//! tridiagonal solver and the standard normal distribution function.

use crate::error::{Error, Result};

pub const DEFAULT_TOL_ABS: f64 = 1e-12;
pub const DEFAULT_TOL_REL: f64 = 1e-12;
const MAX_ITER: usize = 200;
const MAX_DOUBLINGS: usize = 60;

/// An interval `[lo, hi]` on which `f` changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// Evaluates `f` at both ends and checks for a strict sign change.
    pub fn new(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Self> {
        let b = Bracket {
            lo,
            hi,
            f_lo: f(lo),
            f_hi: f(hi),
        };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        let opposite = (self.f_lo < 0.0 && self.f_hi > 0.0) || (self.f_lo > 0.0 && self.f_hi < 0.0);
        if self.lo < self.hi && opposite {
            Ok(())
        } else {
            Err(Error::NoSignChange {
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

/// Brent's method (inverse quadratic interpolation and secant steps guarded
/// by bisection). Stops once the bracket half-width drops below
/// `max(tol_abs, tol_rel·|x|)` or `f` vanishes exactly.
pub fn find_root(f: impl Fn(f64) -> f64, bracket: Bracket, tol_abs: f64, tol_rel: f64) -> Result<f64> {
    bracket.validate()?;
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (bracket.f_lo, bracket.f_hi);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_ITER {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol_abs.max(tol_rel * b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::MaxIterations(MAX_ITER))
}

/// [`find_root`] with the default tolerances.
pub fn find_root_default(f: impl Fn(f64) -> f64, bracket: Bracket) -> Result<f64> {
    find_root(f, bracket, DEFAULT_TOL_ABS, DEFAULT_TOL_REL)
}

/// Builds a bracket `[lo, hi]` with `lo ≥ 0` by doubling `hi` from `t_start`.
///
/// The left end starts at 0 and moves up to the last probe that still has
/// the sign of `f(0)`, so the returned bracket is as tight as the doubling
/// allows.
pub fn expand_bracket(f: impl Fn(f64) -> f64, t_start: f64) -> Result<Bracket> {
    if !(t_start > 0.0 && t_start.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "bracket start must be positive, got {t_start}"
        )));
    }
    let mut lo = 0.0;
    let mut f_lo = f(lo);
    if f_lo == 0.0 || !f_lo.is_finite() {
        return Err(Error::NoSignChange { lo, hi: t_start });
    }
    let mut hi = t_start;
    for _ in 0..=MAX_DOUBLINGS {
        let f_hi = f(hi);
        if f_hi.is_nan() {
            break;
        }
        if (f_hi > 0.0 && f_lo < 0.0) || (f_hi < 0.0 && f_lo > 0.0) {
            return Ok(Bracket { lo, hi, f_lo, f_hi });
        }
        if f_hi != 0.0 {
            lo = hi;
            f_lo = f_hi;
        }
        hi *= 2.0;
    }
    Err(Error::NoSignChange { lo: 0.0, hi })
}

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `sub` and `sup` hold the `n - 1` off-diagonal entries; `sub[i]` sits in
/// row `i + 1` and `sup[i]` in row `i`.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || sub.len() + 1 != n || sup.len() + 1 != n {
        if !(n == 0 && sub.is_empty() && sup.is_empty() && rhs.is_empty()) {
            return Err(Error::DimensionMismatch(format!(
                "diag {n}, sub {}, sup {}, rhs {}",
                sub.len(),
                sup.len(),
                rhs.len()
            )));
        }
        return Ok(Vec::new());
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::SingularMatrix(0));
    }
    if n > 1 {
        c_prime[0] = sup[0] / pivot;
    }
    d_prime[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i - 1] * c_prime[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularMatrix(i));
        }
        if i < n - 1 {
            c_prime[i] = sup[i] / pivot;
        }
        d_prime[i] = (rhs[i] - sub[i - 1] * d_prime[i - 1]) / pivot;
    }
    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    Ok(x)
}

/// Standard normal distribution function, `Φ(x) = erfc(-x/√2)/2`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `log Φ(x)`, accurate far into the lower tail where `Φ` underflows.
pub fn log_normal_cdf(x: f64) -> f64 {
    if x > -30.0 {
        return normal_cdf(x).ln();
    }
    // Asymptotic expansion of the Mills ratio.
    let z2 = x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..8 {
        term *= -((2 * k - 1) as f64) / z2;
        sum += term;
    }
    -0.5 * z2 - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + sum.ln()
}

/// `log(e^a + e^b)` without overflow; `-∞` inputs are handled.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
