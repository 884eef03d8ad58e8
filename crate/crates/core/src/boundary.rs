//! Exponential boundary curves `level0 · exp(exponent · t)`.

use serde::{Deserialize, Serialize};

/// Which side of the process the boundary sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Ruin curve below the start value, `v0 e^{βt}`.
    Lower,
    /// Target curve above the start value, `u0 e^{αt}`.
    Upper,
}

/// An exponential boundary. Parameter ordering relative to a particular model
/// is validated where the boundary is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpBoundary {
    pub level0: f64,
    pub exponent: f64,
    pub side: Side,
}

impl ExpBoundary {
    pub fn lower(v0: f64, beta: f64) -> Self {
        Self {
            level0: v0,
            exponent: beta,
            side: Side::Lower,
        }
    }

    pub fn upper(u0: f64, alpha: f64) -> Self {
        Self {
            level0: u0,
            exponent: alpha,
            side: Side::Upper,
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.level0 * (self.exponent * t).exp()
    }

    #[inline]
    pub fn slope(&self, t: f64) -> f64 {
        self.exponent * self.value(t)
    }

    /// Whether `x` at time `t` is on or past the boundary.
    #[inline]
    pub fn is_crossed(&self, t: f64, x: f64) -> bool {
        match self.side {
            Side::Lower => x <= self.value(t),
            Side::Upper => x >= self.value(t),
        }
    }
}
