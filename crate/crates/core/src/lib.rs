//! Large-deviation rates, most-likely paths, exact hitting probabilities and
//! Monte Carlo estimators for ruin problems driven by Ornstein–Uhlenbeck and
//! geometric Brownian motion processes against exponential boundaries.

pub mod boundary;
pub mod error;
pub mod gbm_rates;
pub mod mc;
pub mod numerics;
pub mod oracle;
pub mod ou_rates;
pub mod path;
pub mod two_ou;

pub use boundary::{ExpBoundary, Side};
pub use error::{Error, Result};
pub use path::SampledPath;
