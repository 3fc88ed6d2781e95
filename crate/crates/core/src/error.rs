//! Error type shared across the engine.
//!
//! Every fallible operation in this crate returns [`Result`]. Variants are
//! grouped by what the caller can do about them: fix an input
//! ([`Error::InvalidParameter`], [`Error::PointOutsideDomain`]), loosen a
//! budget ([`Error::SeriesNonConvergence`], [`Error::ModeBudgetExceeded`]),
//! or accept that the requested quantity does not exist for the given clock
//! ([`Error::BoundedClock`], [`Error::UnboundedClock`]).

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while assembling or evaluating a solution.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// A caller-supplied parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A power series failed to reach the requested tolerance within its
    /// term budget; loosen the accuracy policy or move the argument.
    #[error(
        "Mittag-Leffler series (alpha={alpha}, beta={beta}, x={x}) did not reach \
         rel_tol={rel_tol} within {max_terms} terms"
    )]
    SeriesNonConvergence {
        alpha: f64,
        beta: f64,
        x: f64,
        rel_tol: f64,
        max_terms: usize,
    },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature failed: {0}")]
    QuadratureNonConvergence(String),

    /// The requested time is below the earliest time resolvable by the
    /// configured mode cutoff; raise `lambda_max` or evaluate later.
    #[error(
        "time {t} is below the resolvable floor {floor} for this mode cutoff; \
         raise lambda_max or evaluate at a later time"
    )]
    TimeBelowFloor { t: f64, floor: f64 },

    /// Mode enumeration would exceed the policy cap.
    #[error("mode set needs {needed} modes but the policy caps at {cap}")]
    ModeBudgetExceeded { needed: usize, cap: usize },

    /// An evaluation point lies outside the (closed) domain box.
    #[error("point lies outside the domain")]
    PointOutsideDomain,

    /// An initial density does not integrate to one over the box.
    #[error("initial density integrates to {integral}, expected 1 within 1e-6")]
    DensityNotNormalized { integral: f64 },

    /// A truncated series produced a negative value beyond the tolerance
    /// attributable to roundoff; the mode cutoff is too aggressive here.
    #[error(
        "series value {value} at t={t} is negative beyond roundoff tolerance; \
         raise lambda_max or evaluate at a later time"
    )]
    NegativeSeriesValue { value: f64, t: f64 },

    /// A survival value left `[0, 1 + 1e-6]`, signaling an under-resolved
    /// mode sum rather than a physical answer.
    #[error(
        "survival value {value} at t={t} left [0, 1+1e-6]; \
         raise lambda_max or evaluate at a later time"
    )]
    SurvivalOutOfRange { value: f64, t: f64 },

    /// A coefficient series was cut before its terms became negligible.
    #[error("{context}: residual {residual:.3e} above target {target:.3e}")]
    TruncationNotConverged {
        context: String,
        residual: f64,
        target: f64,
    },

    /// The operation is only defined for clocks that grow without bound.
    #[error("{op} requires an unbounded clock")]
    BoundedClock { op: &'static str },

    /// The operation is only defined for clocks with a finite limit.
    #[error("{op} requires a clock with a finite limit")]
    UnboundedClock { op: &'static str },

    /// A numeric classification could not decide within its sampling grid;
    /// the honest answer is "unknown", not a guess.
    #[error("classification inconclusive: {0}")]
    InconclusiveClassification(String),

    /// Clock inversion was asked for a value the clock never reaches.
    #[error("clock never reaches internal time {s} (limit {limit})")]
    InversionOutOfRange { s: f64, limit: f64 },

    /// The iterative linear solver in the finite-difference reference path
    /// failed to reach its residual target.
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
}
