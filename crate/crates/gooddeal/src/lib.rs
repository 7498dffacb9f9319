//! Robust good-deal valuation bounds and hedging under combined drift and
//! volatility uncertainty.
//!
//! A contingent claim is valued not by a single pricing measure but by the
//! worst case over a set of no-good-deal pricing kernels (instantaneous
//! Sharpe ratios capped at h) taken across a family of reference models:
//! drifts may deviate inside an ellipsoid of radius delta and the
//! quadratic-variation density may lie anywhere in a positive-semidefinite
//! interval [a_lo, a_hi]. The crate computes:
//!
//! - the saddle-point driver of the associated valuation equation, with the
//!   worst-case drift and the optimal hedge in closed form ([`generator`]);
//! - closed-form bounds, hedges, and compensator rates for a put on a
//!   non-traded index correlated with one traded asset ([`markovian`]);
//! - a semilinear PDE solver cross-checking the closed forms ([`markovian`]);
//! - Monte Carlo evidence that the bound net of the hedge gains is a
//!   supermartingale under every feasible model/kernel pair ([`montecarlo`]);
//! - scenario configuration, CSV/JSON reporting, and the command layer used
//!   by the `gooddeal` binary ([`config`], [`report`], [`cli`]).
//!
//! Entry points for exploration are the runnable examples in `examples/`.

// Validation guards are written as negated comparisons (`!(x > 0.0)`) on
// purpose: they reject NaN, which the suggested `x <= 0.0` would wave through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod generator;
pub mod linalg;
pub mod market;
pub mod markovian;
pub mod montecarlo;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{Matrix, SpdMatrix, Vector};

/// Crate version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
