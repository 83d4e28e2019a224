//! Spot volatility estimation from windowed power variations of a
//! discretely observed log-price, with asymptotic confidence intervals and a
//! Monte Carlo harness that checks error levels and convergence rates on
//! simulated stochastic volatility models.

pub mod cli;
pub mod csv_io;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod grid;
pub mod inference;
pub mod kernel;
pub mod models;
pub mod stats;

pub use error::{Error, Result};
pub use estimator::{abs_moment, EstimatorConfig, VolEstimateSeries};
pub use kernel::{SeedSpec, TemperedStableParams};
pub use models::{ModelSpec, Observations, Path};
