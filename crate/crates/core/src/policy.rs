//! Truncation and accuracy policy for spectral series evaluation.
//!
//! The series over box modes is cut at an eigenvalue ball `λ_n ≤ λ_max`
//! (rather than per-axis index caps) because the damping factor of every
//! mode depends on `λ_n` alone, so an eigenvalue ball gives
//! direction-uniform truncation error. The cutoff may be given explicitly
//! or left unset, in which case the scenario builder derives it from the
//! smallest admissible evaluation time `t_min`: `λ_max` is pushed until
//! the slowest-decaying *excluded* mode's relaxation factor at `t_min`
//! falls below `ml_floor`. Evaluation earlier than `t_min` is refused
//! rather than answered inaccurately.

use crate::error::{Error, Result};

/// Controls how the infinite mode sums are truncated and how hard the
/// special-function evaluators work.
#[derive(Debug, Clone)]
pub struct SeriesPolicy {
    /// Eigenvalue cutoff: keep modes with `λ_n ≤ lambda_max`.
    /// `None` → derived from `t_min` at scenario construction.
    pub lambda_max: Option<f64>,
    /// Lower bound on the per-axis index range scanned during mode
    /// enumeration (guards against degenerate scans when `lambda_max`
    /// is small relative to one axis).
    pub min_modes_per_axis: usize,
    /// Relative tolerance for internal series and quadratures.
    pub rel_tol: f64,
    /// Smallest admissible evaluation time.
    pub t_min: f64,
    /// Hard cap on the number of retained modes; exceeding it is an error
    /// (raise `t_min`, lower `lambda_max`, or raise the cap).
    pub max_modes: usize,
    /// Target for the relaxation factor of the first excluded mode at
    /// `t_min` when deriving `lambda_max`. `None` → 1e-12 for `α = 1`
    /// (exponential decay) and 1e-6 for `α < 1`, where the Mittag-Leffler
    /// function's power-law tail would otherwise demand astronomically
    /// many modes.
    pub ml_floor: Option<f64>,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        SeriesPolicy {
            lambda_max: None,
            min_modes_per_axis: 3,
            rel_tol: 1e-8,
            t_min: 1e-2,
            max_modes: 400_000,
            ml_floor: None,
        }
    }
}

impl SeriesPolicy {
    /// Checks field-level invariants.
    pub fn validate(&self) -> Result<()> {
        if let Some(lm) = self.lambda_max {
            if !(lm.is_finite() && lm > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "lambda_max must be positive and finite, got {lm}"
                )));
            }
        }
        if self.min_modes_per_axis < 3 {
            return Err(Error::InvalidParameter(format!(
                "min_modes_per_axis must be at least 3, got {}",
                self.min_modes_per_axis
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-4) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1e-4], got {}",
                self.rel_tol
            )));
        }
        if !(self.t_min.is_finite() && self.t_min > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_min must be positive and finite, got {}",
                self.t_min
            )));
        }
        if self.max_modes == 0 {
            return Err(Error::InvalidParameter(
                "max_modes must be at least 1".into(),
            ));
        }
        if let Some(floor) = self.ml_floor {
            if !(floor > 0.0 && floor <= 1e-2) {
                return Err(Error::InvalidParameter(format!(
                    "ml_floor must lie in (0, 1e-2], got {floor}"
                )));
            }
        }
        Ok(())
    }

    /// The relaxation-factor target used when deriving `lambda_max`.
    pub fn resolved_ml_floor(&self, alpha: f64) -> f64 {
        self.ml_floor
            .unwrap_or(if alpha < 1.0 { 1e-6 } else { 1e-12 })
    }
}
