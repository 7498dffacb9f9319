//! Error type shared across the crate.
//!
//! Numerical preconditions are enforced at construction sites and reported
//! through these variants; no routine panics on bad market data.

use thiserror::Error;

/// Crate-wide error enum.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix required to be symmetric positive definite is not
    /// (asymmetry beyond tolerance, or an eigenvalue at or below the floor).
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    /// The traded covariance `sigma * a * sigma^T` is singular or too
    /// ill-conditioned for a reliable projection.
    #[error("degenerate volatility structure: {0}")]
    DegenerateVolatility(String),

    /// A drift-uncertainty point `theta` violates its radius bound or makes
    /// the shifted price of risk leave the open Sharpe-ratio ball.
    #[error("infeasible drift-uncertainty point: {0}")]
    InfeasibleTheta(String),

    /// A pricing-kernel loading `lambda` exceeds the Sharpe-ratio bound.
    #[error("infeasible pricing kernel: {0}")]
    InfeasibleKernel(String),

    /// A closed form was requested outside the parameter regime in which it
    /// is valid.
    #[error("closed form unavailable in this regime: {0}")]
    Regime(String),

    /// A grid specification is empty, non-monotone, or otherwise unusable.
    #[error("invalid grid: {0}")]
    Grid(String),

    /// A time-stepping scheme produced values outside its a priori bounds.
    #[error("numerical instability detected: {0}")]
    Stability(String),

    /// An argument is outside the documented domain of the routine.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A scenario configuration file could not be parsed or is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// Filesystem failure while reading configs or writing reports.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
