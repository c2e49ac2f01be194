//! Model-robust counterfactual outcome analysis.
//!
//! Given observational data where each unit carries covariates, an
//! exposure label and a continuous outcome, this crate answers "what would
//! the outcome have been under a different exposure?" with distribution-
//! free prediction intervals rather than bare point effects:
//!
//! * [`features`] expands covariates into sparse additive regressors:
//!   one-hot categorical encodings and piecewise-linear hinges with
//!   empirical-quantile knots.
//! * [`solver`] fits a tuning-free square-root lasso per exposure by
//!   coordinate descent over sufficient statistics, cheap to re-fit after
//!   single-sample augmentation.
//! * [`conformal`] turns those fits into full conformal score curves,
//!   prediction sets at any coverage level, and point predictions.
//! * [`counterfactual`] compares exposures: effect estimates plus the
//!   confidence measure, the largest coverage level at which two
//!   prediction sets are disjoint.
//! * [`experiments`] holds synthetic benchmarks and a Monte Carlo harness
//!   validating empirical interval coverage.
//! * [`dataset`] and [`schema`] handle CSV/JSON ingestion.
//!
//! Monte Carlo replicates and conformal grid points are data-parallel;
//! with the default `parallel` feature they fan out over a rayon pool (see
//! [`exec`]), and without it everything runs sequentially with identical
//! results.

pub mod conformal;
pub mod counterfactual;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod features;
pub mod schema;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Parallelism;
