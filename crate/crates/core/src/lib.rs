//! Bayesian estimation of the AR(1) autoregressive parameter under a
//! truncated-normal prior on the stationarity region (−1, 1).
//!
//! The crate is organised bottom-up:
//!
//! * [`truncnorm`] — standard-normal and truncated-normal primitives,
//! * [`ar1`] — the zero-mean AR(1) process, simulation and likelihoods,
//! * [`estimators`] — MME, CLS, exact MLE and conditional MLE,
//! * [`bayes`] — posteriors under four priors, the Bayes estimator and
//!   centered credible intervals,
//! * [`experiments`] — seeded Monte Carlo studies (estimator comparison,
//!   absolute bias, prior sensitivity / interval coverage),
//! * [`diagnostics`] — Phillips–Perron unit-root test, residuals and
//!   residual normality tests.

pub mod ar1;
pub mod bayes;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod optimize;
pub mod rng;
pub mod truncnorm;

pub use ar1::{Ar1Params, TimeSeries};
pub use bayes::{PosteriorFamily, PosteriorSummary, PriorKind, PriorSpec};
pub use error::{Error, Result};
pub use estimators::{EstimatorResult, Method};
pub use truncnorm::TruncatedNormal;
