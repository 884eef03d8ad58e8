use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A path sampled on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times vs {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameters(
                "path times must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, values })
    }

    /// Samples `f` on `n + 1` equally spaced points of `[0, horizon]`.
    /// The last time is exactly `horizon`.
    pub fn from_fn(horizon: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let times = uniform_grid(horizon, n);
        let values = times.iter().map(|&t| f(t)).collect();
        Self { times, values }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Largest absolute difference to `reference` over the sample times.
    pub fn sup_distance(&self, reference: impl Fn(f64) -> f64) -> f64 {
        self.iter()
            .map(|(t, x)| (x - reference(t)).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    let h = horizon / n as f64;
    let mut times: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    times[n] = horizon;
    times
}
