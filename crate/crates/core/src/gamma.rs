//! Real gamma-function helpers for series coefficients.
//!
//! The engine needs `Γ(x)` on the whole real line (minus the poles) and,
//! much more often, its reciprocal. The reciprocal is the quantity series
//! code actually wants: it is entire, and being *exactly* zero at the poles
//! lets coefficient loops run over `1/Γ(β - αk)` without special-casing the
//! indices where the asymptotic expansion drops a term.

/// `sin(πx)` evaluated with argument reduction in units of π.
///
/// Reducing `x` against the nearest integer before multiplying by π keeps
/// the result exact at integers and fully accurate for large `|x|`, where
/// `sin(PI * x)` would lose all precision.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    let s = (core::f64::consts::PI * r).sin();
    // (-1)^n factor from shifting by n half-periods of sin.
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// Gamma function on the real line.
///
/// Poles at `0, -1, -2, ...` return `±inf` (the sign libm assigns);
/// arguments beyond ~171.6 overflow to `+inf`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Reciprocal gamma function, `1/Γ(x)`, exact zero at the poles.
///
/// A plain reciprocal of [`gamma`] keeps libm's few-ulp accuracy everywhere
/// (a hand-rolled reflection loses ~2e-11 near large negative arguments);
/// overflow of `Γ` for large positive `x` correctly collapses to zero, and
/// the poles at non-positive integers are pinned to an exact zero.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.5 && x == x.round() {
        return 0.0;
    }
    1.0 / libm::tgamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Backend accuracy bar: the worst relative error observed across the
    /// reference grid must stay a decade under the 1e-12 the Mittag-Leffler
    /// tolerances assume for coefficient evaluation.
    const GAMMA_REL_TOL: f64 = 1e-13;

    // Frozen from a 40-digit mpmath evaluation (scripts/reference_values.py)
    // at the exact binary doubles below, not their decimal spellings; the
    // distinction matters wherever digamma is large (e.g. x = -33.999).
    const GAMMA_REFERENCE: &[(f64, f64)] = &[
        (0.001, 999.4237724845955),
        (0.1, 9.51350769866873),
        (0.5, 1.772453850905516),
        (1.0, 1.0),
        (1.5, 0.886226925452758),
        (2.5, 1.329340388179137),
        (3.7, 4.170651783796604),
        (10.3, 716430.6890623764),
        (35.5, 1.7403941995805607e+39),
        (100.3, 3.711481867182677e+156),
        (170.5, 5.56209241456e+305),
        (-0.001, -1000.5782056293586),
        (-0.1, -10.686287021193193),
        (-0.5, -3.544907701811032),
        (-0.7, -4.273669982410843),
        (-0.9, -10.570564109631926),
        (-1.3, 3.328347006788609),
        (-2.5, -0.9453087204829419),
        (-5.7, 0.009393206267354336),
        (-10.3, -5.26236323953561e-7),
        (-20.7, -1.9040507251044001e-19),
        (-50.5, -1.449954393907748e-65),
        (-0.99, -100.4369546658086),
        (-33.999, 3.3991782435656006e-36),
    ];

    #[test]
    fn gamma_matches_reference_grid() {
        for &(x, want) in GAMMA_REFERENCE {
            let got = gamma(x);
            assert_relative_eq!(got, want, max_relative = GAMMA_REL_TOL);
        }
    }

    #[test]
    fn rgamma_matches_reference_grid() {
        for &(x, want) in GAMMA_REFERENCE {
            let got = rgamma(x);
            assert_relative_eq!(got, 1.0 / want, max_relative = GAMMA_REL_TOL);
        }
    }

    #[test]
    fn rgamma_is_exactly_zero_at_poles() {
        for k in 0..60 {
            assert_eq!(rgamma(-(k as f64)), 0.0, "pole at -{k}");
        }
    }

    #[test]
    fn rgamma_large_positive_underflows_to_zero() {
        // Γ overflows past ~171.6; the reciprocal must collapse cleanly.
        assert_eq!(rgamma(180.0), 0.0);
    }

    #[test]
    fn sin_pi_exact_at_integers_and_accurate_at_halves() {
        assert_eq!(sin_pi(3.0), 0.0);
        assert_eq!(sin_pi(-7.0), 0.0);
        assert_relative_eq!(sin_pi(0.5), 1.0, max_relative = 1e-15);
        assert_relative_eq!(sin_pi(2.5), 1.0, max_relative = 1e-15);
        assert_relative_eq!(sin_pi(-0.5), -1.0, max_relative = 1e-15);
        // Large argument: reduction keeps full precision.
        assert_relative_eq!(sin_pi(1e9 + 0.25), 0.5f64.sqrt(), max_relative = 1e-12);
    }
}
