//! Nonparametric estimation of the generator and of the squared volatility
//! term of forward–backward SDEs from discretely observed paths.
//!
//! * [`kernels`]: Epanechnikov and quartic kernels with moment constants.
//! * [`model`], [`sim`]: registered models and Euler–Maruyama paths.
//! * [`estimators`]: local-constant and local-linear estimators, local time, plug-in variances.
//! * [`bandwidth`]: cross-validated bandwidth choice.
//! * [`el`]: empirical-likelihood and normal-theory intervals.
//! * [`harness`]: Monte Carlo tables and coverage experiments.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandwidth;
pub mod el;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod kernels;
pub mod model;
pub mod quantile;
pub mod sim;

pub use el::{CiMethod, ELEvaluation, IntervalResult};
pub use error::{Error, Result};
pub use estimators::{EstimatorKind, Method, PointEstimate, Target};
pub use harness::{Bandwidth, ExperimentConfig, McSummary};
pub use kernels::{Kernel, KernelId, KernelSpec};
pub use model::{ModelConfig, ModelSpec};
pub use sim::SamplePath;
