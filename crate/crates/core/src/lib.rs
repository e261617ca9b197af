//! Bias-corrected prevalence estimation for random samples drawn from a
//! finite population and screened with an imperfect diagnostic test.
//!
//! The crate is split into five layers:
//!
//! * [`estimators`]: positivity rate, Rogan–Gladen correction and the
//!   variance family (no FPC, Cochran FPC, FPC plus misclassification term).
//! * [`beta`]: log-beta, regularized incomplete beta and its inverse.
//! * [`intervals`]: Wald intervals and the scale/shift-adjusted Jeffreys
//!   credible intervals.
//! * [`sim`]: a seedable finite-population Monte Carlo engine.
//! * [`experiments`]: scenario grids, the standard-error sweep, report
//!   writers and the `prevkit` command line.

pub mod beta;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod intervals;
pub mod sim;

pub use error::{Error, Result};
pub use estimators::{estimate, PrevalenceEstimate, SampleSummary, TestKit, VarianceBundle};
pub use intervals::{Interval, IntervalMethod};
