//! Likelihood construction, restricted-domain maximum likelihood, normal
//! quantiles, confidence intervals and the Holevo variance.

mod holevo;
mod interval;
mod likelihood;
mod mle;
mod quantile;

pub use holevo::{holevo_variance_empirical, holevo_variance_of_errors, DEFAULT_PERIOD};
pub use interval::{confidence_interval, ConfidenceInterval, Interval};
pub use likelihood::{log_likelihood_eval, LogLikelihood, PROB_FLOOR};
pub use mle::{mle, mle_with_options, EstimateResult, MleEngine, MleOptions};
pub use quantile::{normal_quantile, z_for_confidence};
