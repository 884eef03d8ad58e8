//! Model parameters as flags, merged with an optional config file.

use std::collections::BTreeMap;
use std::path::Path;

use clap::{Args, ValueEnum};
use ruinld_core::gbm_rates::{CorrGbmPair, GbmModel};
use ruinld_core::mc::{default_step, Monitor, SimConfig};
use ruinld_core::ou_rates::OuModel;
use ruinld_core::two_ou::TwoOuModel;
use ruinld_core::ExpBoundary;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MonitorArg {
    Grid,
    Bridge,
}

impl From<MonitorArg> for Monitor {
    fn from(m: MonitorArg) -> Self {
        match m {
            MonitorArg::Grid => Monitor::Grid,
            MonitorArg::Bridge => Monitor::Bridge,
        }
    }
}

macro_rules! params {
    ($($(#[$doc:meta])* $name:ident: $ty:ty,)*) => {
        #[derive(Debug, Clone, Default, Args)]
        pub struct Params {
            $($(#[$doc])* #[arg(long)] pub $name: Option<$ty>,)*
        }

        impl Params {
            /// Fills every unset flag from `file`. Unknown keys are rejected.
            pub fn merge(&mut self, file: &BTreeMap<String, String>) -> Result<(), CliError> {
                for (key, raw) in file {
                    match key.replace('-', "_").as_str() {
                        $(stringify!($name) => {
                            if self.$name.is_none() {
                                self.$name = Some(parse_value::<$ty>(key, raw)?);
                            }
                        })*
                        _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
                    }
                }
                Ok(())
            }

            /// The set flags as a JSON object, in declaration order.
            pub fn echo(&self) -> Value {
                let mut map = Map::new();
                $(if let Some(v) = &self.$name {
                    map.insert(stringify!($name).into(), v.to_json());
                })*
                Value::Object(map)
            }
        }
    };
}

params! {
    /// OU drift slope or GBM growth rate
    mu: f64,
    /// Constant OU drift
    r: f64,
    /// Noise scale of the (first) process
    sigma: f64,
    /// Start of the (first) process
    x0: f64,
    /// Lower curve level v0·e^{βt}
    v0: f64,
    /// Lower curve exponent, or growth rate of the second process
    beta: f64,
    /// Upper curve level u0·e^{αt}
    u0: f64,
    /// Upper curve exponent, or growth rate of the first process
    alpha: f64,
    /// Noise scale of the second process
    b: f64,
    /// Start of the second process
    y0: f64,
    /// Noise correlation of the pair
    rho: f64,
    /// Time horizon (finite-horizon rates, simulations)
    horizon: f64,
    /// Fixed end time of a path (path, classify)
    t: f64,
    /// Noise scale: reported approximation is p ≈ exp(−I/ε)
    eps: f64,
    /// Number of intervals for paths and oracles
    n: usize,
    /// Number of simulated paths
    paths: usize,
    /// Simulation seed
    seed: u64,
    /// Simulation step
    step: f64,
    /// Crossing detection for simulations
    monitor: MonitorArg,
}

trait EchoValue {
    fn to_json(&self) -> Value;
}

impl EchoValue for f64 {
    fn to_json(&self) -> Value {
        crate::output::number(*self)
    }
}

impl EchoValue for usize {
    fn to_json(&self) -> Value {
        Value::from(*self)
    }
}

impl EchoValue for u64 {
    fn to_json(&self) -> Value {
        Value::from(*self)
    }
}

impl EchoValue for MonitorArg {
    fn to_json(&self) -> Value {
        Value::from(match self {
            MonitorArg::Grid => "grid",
            MonitorArg::Bridge => "bridge",
        })
    }
}

trait ParseValue: Sized {
    fn parse(raw: &str) -> Option<Self>;
}

impl ParseValue for f64 {
    fn parse(raw: &str) -> Option<Self> {
        raw.parse().ok()
    }
}

impl ParseValue for usize {
    fn parse(raw: &str) -> Option<Self> {
        raw.parse().ok()
    }
}

impl ParseValue for u64 {
    fn parse(raw: &str) -> Option<Self> {
        raw.parse().ok()
    }
}

impl ParseValue for MonitorArg {
    fn parse(raw: &str) -> Option<Self> {
        MonitorArg::from_str(raw, true).ok()
    }
}

fn parse_value<T: ParseValue>(key: &str, raw: &str) -> Result<T, CliError> {
    T::parse(raw.trim()).ok_or_else(|| CliError::Usage(format!("invalid value `{raw}` for config key `{key}`")))
}

/// Reads `key = value` lines (`#` starts a comment), or a JSON object as
/// written by this tool, taking its `params` member when present.
pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        let obj = value.get("params").unwrap_or(&value);
        let obj = obj
            .as_object()
            .ok_or_else(|| CliError::Usage("JSON config must be an object".into()))?;
        return Ok(obj
            .iter()
            .map(|(k, v)| (k.clone(), v.as_str().map_or_else(|| v.to_string(), str::to_owned)))
            .collect());
    }
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        map.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    Ok(map)
}

fn need<T: Copy>(name: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{name}")))
}

impl Params {
    pub fn eps(&mut self) -> f64 {
        *self.eps.get_or_insert(1.0)
    }

    pub fn n_or(&mut self, default: usize) -> usize {
        *self.n.get_or_insert(default)
    }

    pub fn ou(&mut self) -> Result<OuModel, CliError> {
        let sigma = *self.sigma.get_or_insert(1.0);
        let model = OuModel::new(need("mu", self.mu)?, sigma, need("x0", self.x0)?);
        Ok(match self.r {
            Some(r) => model.with_drift(r),
            None => model,
        })
    }

    pub fn lower(&self) -> Result<ExpBoundary, CliError> {
        Ok(ExpBoundary::lower(need("v0", self.v0)?, need("beta", self.beta)?))
    }

    pub fn upper(&self) -> Result<ExpBoundary, CliError> {
        Ok(ExpBoundary::upper(need("u0", self.u0)?, need("alpha", self.alpha)?))
    }

    pub fn gbm(&self) -> Result<GbmModel, CliError> {
        Ok(GbmModel::new(need("mu", self.mu)?, need("sigma", self.sigma)?, need("x0", self.x0)?))
    }

    pub fn two_ou(&self) -> Result<TwoOuModel, CliError> {
        Ok(TwoOuModel {
            alpha: need("alpha", self.alpha)?,
            beta: need("beta", self.beta)?,
            sigma: need("sigma", self.sigma)?,
            b: need("b", self.b)?,
            x0: need("x0", self.x0)?,
            y0: need("y0", self.y0)?,
        })
    }

    pub fn pair(&mut self) -> Result<CorrGbmPair, CliError> {
        Ok(CorrGbmPair {
            alpha: need("alpha", self.alpha)?,
            beta: need("beta", self.beta)?,
            sigma: need("sigma", self.sigma)?,
            b: need("b", self.b)?,
            rho: *self.rho.get_or_insert(0.0),
            x0: need("x0", self.x0)?,
            y0: need("y0", self.y0)?,
        })
    }

    pub fn horizon(&self) -> Result<f64, CliError> {
        need("horizon", self.horizon)
    }

    pub fn time(&self) -> Result<f64, CliError> {
        need("t", self.t)
    }

    /// Simulation settings with defaults filled in (and echoed).
    pub fn sim(&mut self) -> Result<SimConfig, CliError> {
        let horizon = self.horizon()?;
        let step = *self.step.get_or_insert(default_step(horizon));
        let paths = *self.paths.get_or_insert(10_000);
        let seed = *self.seed.get_or_insert(0);
        let monitor = *self.monitor.get_or_insert(MonitorArg::Grid);
        Ok(SimConfig::new(horizon, paths, seed).with_step(step).with_monitor(monitor.into()))
    }
}
