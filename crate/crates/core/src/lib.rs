//! Spectral engine for clock-driven fractional diffusion on boxes.
//!
//! The crate solves absorbing-boundary diffusion problems on axis-aligned
//! boxes where the time derivative is a Caputo-type fractional derivative
//! taken with respect to a monotone "clock" function `g(t)`. Solutions are
//! sine-series expansions whose mode amplitudes relax as Mittag-Leffler
//! functions of `-λ D g(t)^α`; everything downstream (survival probability,
//! first-passage density, mean first-passage time, heavy-tail asymptotics,
//! stationary profiles under saturating clocks) is assembled from that one
//! representation.
//!
//! Layout:
//! - [`ml`]: real-line Mittag-Leffler evaluation with controlled accuracy,
//! - [`clocks`]: clock families, their calculus, and first-passage
//!   classification,
//! - [`spectral`]: box eigensystem, mode enumeration, initial-condition
//!   projection,
//! - [`solution`]: user-facing scenario type and the physical observables,
//! - [`oracle`]: an independent finite-difference solver used to validate
//!   the spectral path,
//! - [`gamma`], [`quad`]: numerical support (gamma functions, quadrature).

// Guards are written as `!(x > 0.0)` on purpose: the negated form also
// rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clocks;
pub mod error;
pub mod gamma;
pub mod ml;
pub mod oracle;
pub mod policy;
pub mod quad;
pub mod solution;
pub mod spectral;

pub use error::{Error, Result};
