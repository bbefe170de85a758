//! Kendall functions and Kendall-scenario tail measures.
//!
//! The conditioning region for a vector `X` is a level set of its joint
//! CDF: `F_X(X) <= K^-1(alpha)` for the lower tail and
//! `F_X(X) >= K^-1(1 - alpha)` for the upper tail, where `K` is the
//! distribution function of `F_X(X)`. All measures are estimated by
//! counting on samples.

mod kendall;
mod measures;
mod scenario;

pub use kendall::{
    analytic_kendall_fn, dominance_counts, dominance_counts_naive, empirical_kendall_fn, kendall_pit, multivariate_pit,
    KendallFunction, KendallSource, MIN_KENDALL_OBS,
};
pub use measures::{
    lambda_kendall, q_lower_kendall, q_upper_kendall, tail_concentration, CollapsedSample, ConcentrationPoint,
    LambdaEstimate, Side, TailMeasureResult, MIN_CONDITIONING,
};
pub use scenario::{scenario_on_sample, scenario_tail_coefficient, Direction, ScenarioPattern};

#[cfg(test)]
mod tests;
