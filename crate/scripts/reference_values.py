#!/usr/bin/env python3
"""High-precision reference values for the Rust test suite.

Computes Mittag-Leffler values E_{alpha,beta}(x), gamma-function values, and
a handful of closed-form diffusion quantities with mpmath at >= 20-30
significant digits, then prints them as Rust constant tables. The printed
tables are pasted into the test sources (each test file names this script in
a comment).

Method notes:
  * E_{alpha,beta}(x) is summed from the defining power series
    sum_k x^k / Gamma(alpha k + beta) with adaptive guard digits sized from
    the largest term, so cancellation for x < 0 costs nothing.
  * For strongly negative x the algebraic expansion
    -sum_{k>=1} x^{-k} / Gamma(beta - alpha k) is used instead, truncated
    before its smallest term; the first omitted term bounds the remainder
    and is checked against the requested precision. The two routes are
    cross-validated on an overlap band below.
  * Slowly converging mode sums (algebraic term decay) are split into a
    direct part plus an analytic tail: each mode's E-value is replaced by
    its algebraic expansion and the remaining sums over n reduce to Hurwitz
    zeta values.

Run: python3 scripts/reference_values.py
"""

import sys
from mpmath import (mp, mpf, gamma, rgamma, loggamma, exp, sqrt, pi, log,
                    fabs, nsum, inf, nstr, sin, zeta, quad)


def progress(msg):
    print(msg, file=sys.stderr, flush=True)


def series_cost(alpha, x):
    """Rough term count for the power series to converge."""
    ax = abs(float(x))
    if ax <= 1.0:
        return 80
    return int(ax ** (1.0 / float(alpha)) / float(alpha)) + 80


def ml_series(alpha, beta, x, digits):
    alpha, beta, x = mpf(alpha), mpf(beta), mpf(x)
    if x == 0:
        mp.dps = digits + 10
        return rgamma(beta)
    # pass 1: truncation index and largest-term magnitude, low precision
    mp.dps = 15
    k, log10_max, prev = 0, mpf("-inf"), mpf("inf")
    ln10 = log(mpf(10))
    while True:
        lt = (k * log(fabs(x)) - loggamma(alpha * k + beta)) / ln10
        log10_max = max(log10_max, lt)
        if lt < -(digits + 15) and lt < prev:
            break
        prev = lt
        k += 1
        if k > 60_000:
            raise RuntimeError("series impractical for alpha=%s x=%s" % (alpha, x))
    kmax = k
    guard = int(max(0, float(log10_max))) + 30
    mp.dps = digits + guard
    s = mpf(0)
    term_x = mpf(1)
    xx = mpf(x)
    for k in range(kmax + 1):
        s += term_x * rgamma(alpha * k + beta)
        term_x *= xx
    mp.dps = digits + 10
    return +s


def ml_asym(alpha, beta, x, digits):
    """Large-|x| expansion for x < 0; returns None if the expansion cannot
    reach the requested precision before its terms turn around.

    Term magnitudes are bounded by a smooth envelope (reflection formula with
    the sine factor replaced by 1); the envelope has a single minimum at
    k_stop where (alpha k)^alpha ~ |x|, so summation stops there at the
    latest and the envelope bounds the remainder."""
    alpha, beta, x = mpf(alpha), mpf(beta), mpf(x)
    mp.dps = digits + 20

    def env(k):
        arg = beta - alpha * k
        if arg > mpf("0.5"):
            return fabs(x) ** (-k) / gamma(arg)
        return fabs(x) ** (-k) * gamma(1 - arg) / pi

    k_stop = int(float(fabs(x)) ** (1.0 / float(alpha)) / float(alpha)) + 1
    k_stop = min(k_stop, 3000)
    s = mpf(0)
    rem = None
    k = 1
    while k <= k_stop:
        s += -(x ** (-k)) * rgamma(beta - alpha * k)
        e_next = env(k + 1)
        if e_next < mpf(10) ** (-(digits + 8)) * max(fabs(s), mpf(10) ** -60):
            rem = e_next
            break
        k += 1
    if rem is None:
        rem = env(min(k, k_stop))
    scale = max(fabs(s), mpf(10) ** -60)
    if rem / scale > mpf(10) ** (-(digits + 2)):
        return None
    return +s


def ml(alpha, beta, x, digits=30):
    """Dispatch: cheap expansion when it reaches the target, else series."""
    if float(x) < 0:
        v = ml_asym(alpha, beta, x, digits)
        if v is not None:
            return v
    if series_cost(alpha, x) <= 60_000:
        return ml_series(alpha, beta, x, digits)
    raise RuntimeError("no viable route for alpha=%s beta=%s x=%s" % (alpha, beta, x))


def rust17(v):
    return nstr(mpf(v), 17, strip_zeros=False)


def emit_table(name, rows, cols):
    print("pub const %s: &[(%s)] = &[" % (name, ", ".join(["f64"] * cols)))
    for r in rows:
        print("    (%s)," % ", ".join(rust17(v) for v in r))
    print("];")
    print()


def odd_tail(s, n_min):
    """sum over odd n >= n_min of n^{-s}; n_min odd."""
    m0 = (mpf(n_min) - 1) / 2
    return mpf(2) ** (-s) * zeta(s, m0 + mpf("0.5"))


def odd_alt_tail(s, n_min):
    """sum over odd n >= n_min of (-1)^((n-1)/2) n^{-s}; n_min = 1 mod 4."""
    j0 = (mpf(n_min) - 1) / 4
    return mpf(4) ** (-s) * (zeta(s, j0 + mpf("0.25")) - zeta(s, j0 + mpf("0.75")))


def mode_sum_with_tail(weight_kind, alpha, c, digits, n_direct=301, kmax=14):
    """sum over odd n of w_n E_alpha(-c n^2), with
    w_n = (4/(pi n)) (-1)^((n-1)/2)  (weight_kind 'fptd-ish')
    or w_n = 2                        (weight_kind 'center').

    Direct part for n <= n_direct; tail closed with the algebraic expansion
    E_alpha(-y) = sum_k (-1)^(k+1) y^-k rgamma(1 - alpha k) and Hurwitz zeta.
    """
    mp.dps = digits + 15
    c = mpf(c)
    total = mpf(0)
    n = 1
    while n <= n_direct:
        e = ml(alpha, 1.0, -c * n ** 2, digits + 8)
        if weight_kind == "fptd-ish":
            w = mpf(4) / (pi * n) * (-1) ** ((n - 1) // 2)
        else:
            w = mpf(2)
        total += w * e
        n += 2
    n0 = n_direct + 2
    for k in range(1, kmax + 1):
        coef = (-1) ** (k + 1) * c ** (-k) * rgamma(1 - alpha * mpf(k))
        if weight_kind == "fptd-ish":
            # weight 4/(pi n) alternating, power n^{-2k}
            if n0 % 4 != 1:
                raise RuntimeError("alternating tail needs n0 = 1 mod 4")
            total += coef * mpf(4) / pi * odd_alt_tail(2 * k + 1, n0)
        else:
            total += coef * 2 * odd_tail(2 * k, n0)
    return +total


def main():
    mp.dps = 40

    # ---- cross-validation of the two ML routes on an overlap band ----
    overlap = [(0.5, 1.0, -30.0), (0.5, 0.5, -30.0), (0.7, 1.0, -80.0),
               (0.3, 0.3, -8.0), (0.1, 1.0, -1.8), (0.9, 0.9, -200.0)]
    print("// route cross-validation (series vs large-|x| expansion):")
    for a, b, x in overlap:
        progress("overlap %s %s %s" % (a, b, x))
        s = ml_series(a, b, x, 22)
        t = ml_asym(a, b, x, 20)
        assert t is not None, (a, b, x)
        rel = fabs(s - t) / fabs(s)
        print("//   alpha=%-4s beta=%-4s x=%-7s agree to %s" % (a, b, x, nstr(rel, 3)))
        assert rel < mpf(10) ** -15, (a, b, x, rel)
    print()

    # ---- sanity identities ----
    progress("sanity")
    from mpmath import erf
    assert fabs(ml(1.0, 1.0, -1.0, 30) - exp(-1)) < mpf(10) ** -28
    assert fabs(ml(0.5, 0.5, 0.0, 30) - 1 / gamma(mpf("0.5"))) < mpf(10) ** -28
    e05m1 = ml(0.5, 1.0, -1.0, 30)
    print("// E_{1/2}(-1)   = %s" % nstr(e05m1, 25))
    print("// exp(1)erfc(1) = %s" % nstr(exp(1) * (1 - erf(1)), 25))
    assert fabs(e05m1 - exp(1) * (1 - erf(1))) < mpf(10) ** -26
    lead = -mpf(-100.0) ** mpf(-2) / gamma(mpf("-0.5"))
    print("// leading tail term (a=1/2, x=-100): %s  [1e-4/(2 sqrt(pi)) = %s]"
          % (nstr(lead, 20), nstr(mpf("1e-4") / (2 * sqrt(pi)), 20)))
    full = ml(0.6, 0.6, -50.0, 30)
    lead06 = -mpf(-50.0) ** mpf(-2) / gamma(mpf("-0.6"))
    print("// E_{0.6,0.6}(-50) = %s vs leading %s (rel gap %s)"
          % (nstr(full, 20), nstr(lead06, 20), nstr(fabs(full - lead06) / fabs(full), 3)))
    print()

    # ---- ML reference grid ----
    rows = []
    for a in [0.1, 0.3, 0.5, 0.7, 0.9, 0.95]:
        for x in [-0.5, -2.0, -7.0, -15.0, -40.0, -120.0, -1000.0, -1e4, -1e6]:
            progress("grid a=%s b=1 x=%s" % (a, x))
            rows.append((a, 1.0, x, ml(a, 1.0, x, 24)))
    for a in [0.1, 0.3, 0.5, 0.7, 0.9, 0.95]:
        for x in [-1.0, -10.0, -60.0, -300.0, -1e5]:
            progress("grid a=%s b=a x=%s" % (a, x))
            rows.append((a, a, x, ml(a, a, x, 24)))
    for a, x in [(0.5, 1.0), (0.5, 4.0), (0.7, 2.5), (0.9, 6.0), (1.0, 3.0), (0.3, 1.5)]:
        rows.append((a, 1.0, x, ml(a, 1.0, x, 24)))
    for a, b, x in [(0.5, 1.5, -8.0), (0.5, 2.3, -30.0), (0.7, 0.4, -12.0),
                    (0.4, 1.0, -25.0), (0.6, 0.6, -50.0), (0.8, 0.8, -3.7),
                    (0.5, 0.5, -1.0), (0.5, 0.5, -25.0), (0.3, 0.3, -120.0),
                    (0.95, 1.0, -30.0), (0.95, 0.95, -30.0), (0.99, 1.0, -20.0),
                    (1.0, 0.5, -30.0), (1.0, 2.0, -5.0), (1.0, 1.7, 2.0),
                    (0.25, 1.0, -3.0), (0.15, 0.15, -2.0)]:
        progress("grid a=%s b=%s x=%s" % (a, b, x))
        rows.append((a, b, x, ml(a, b, x, 24)))
    emit_table("ML_REFERENCE", rows, 4)

    # ---- gamma reference grid ----
    progress("gamma")
    grows = []
    for x in [0.001, 0.1, 0.5, 1.0, 1.5, 2.5, 3.7, 10.3, 35.5, 100.3, 170.5,
              -0.001, -0.1, -0.5, -0.7, -0.9, -1.3, -2.5, -5.7, -10.3, -20.7,
              -50.5, -0.99, -33.999]:
        # mpf(float) is the exact binary double the consumer will pass;
        # mpf(repr(x)) would be the decimal, which differs by ~ulp and is
        # amplified by digamma ~ 1e3 near poles (seen at x = -33.999).
        grows.append((x, gamma(mpf(x))))
    emit_table("GAMMA_REFERENCE", grows, 2)

    # ---- classical diffusion closed sums (1D box, absorbing ends) ----
    progress("classical")
    mp.dps = 40
    x0, t = mpf("0.5"), mpf("0.1")
    field = nsum(lambda n: 2 * sin(n * pi * x0) ** 2 * exp(-n ** 2 * pi ** 2 * t), [1, inf])
    surv = nsum(lambda n: (mpf(2) / (n * pi)) * (1 - (-1) ** n) * sin(n * pi * x0)
                * exp(-n ** 2 * pi ** 2 * t), [1, inf])
    fptd = nsum(lambda n: (mpf(2) / (n * pi)) * (1 - (-1) ** n) * sin(n * pi * x0)
                * n ** 2 * pi ** 2 * exp(-n ** 2 * pi ** 2 * t), [1, inf])
    print("// classical 1D box, L=D=1, source at 1/2, t = 1/10:")
    print("pub const CLASSICAL_FIELD_CENTER_T01: f64 = %s;" % rust17(field))
    print("pub const CLASSICAL_SURVIVAL_T01: f64 = %s;" % rust17(surv))
    print("pub const CLASSICAL_FPTD_T01: f64 = %s;" % rust17(fptd))
    print("pub const CLASSICAL_MFPT_CENTER: f64 = 0.125; // x0 (L - x0) / (2 D), exact")
    print()

    # ---- saturating clock g(t) = 1 - e^{-t}: stationary objects ----
    # alpha = 1/2, 1D, L = D = 1, source at 1/2, g_inf = 1.
    progress("dodson")
    p_inf = mode_sum_with_tail("fptd-ish", 0.5, pi ** 2, 24, n_direct=303)
    print("// saturating clock (rate 1), alpha = 1/2: survival floor and field value")
    print("pub const DODSON_P_INF: f64 = %s;" % rust17(p_inf))
    stat = mode_sum_with_tail("center", 0.5, pi ** 2, 24)
    print("pub const DODSON_STATIONARY_CENTER: f64 = %s;" % rust17(stat))
    print()

    # ---- finite-MFPT closed form for g = t^3, alpha = 1/2 (exponent 3/2) ----
    # Mode integral: int_0^inf E_a(-c t^gam) dt
    #              = c^{-1/gam} (1/gam) G(1/gam) G(1-1/gam) / G(1-a/gam).
    progress("mfpt closed form")
    mp.dps = 35
    a, gam = mpf("0.5"), mpf("1.5")
    K = (1 / gam) * gamma(1 / gam) * gamma(1 - 1 / gam) / gamma(1 - a / gam)
    S = nsum(lambda j: (mpf(4) / (pi * (2 * j + 1))) * (-1) ** int(j)
             * ((2 * j + 1) ** 2 * pi ** 2) ** (-1 / gam), [0, inf])
    tau = K * S
    print("// MFPT for g = t^3, alpha = 1/2, 1D, L = D = 1, source at 1/2")
    print("// (mode-wise Mellin closed form; independent of any quadrature)")
    print("pub const MFPT_POWERLAW3_ALPHA05: f64 = %s;" % rust17(tau))
    # sanity: Mellin constant vs direct quadrature for the first mode,
    # with the analytic remainder of the integral beyond T = 100.
    progress("mfpt quad check")
    mp.dps = 25
    c = pi ** 2
    head = quad(lambda tt: ml(0.5, 1.0, -c * tt ** gam, 20), [0, mpf("0.1"), 1, 10, 100])
    T = mpf(100)
    tail = mpf(0)
    for k in range(1, 12):
        tail += (-1) ** (k + 1) * c ** (-k) * rgamma(1 - a * k) \
            * T ** (1 - gam * k) / (gam * k - 1)
    direct = head + tail
    closed = c ** (-1 / gam) * K
    rel = fabs(direct - closed) / fabs(closed)
    print("// mode-1 integral check: closed %s vs quad %s (rel %s)"
          % (nstr(closed, 15), nstr(direct, 15), nstr(rel, 3)))
    assert rel < mpf(10) ** -9, rel
    print()

    # ---- FPTD tail constant for the centred 1D scenario, alpha = 1/2 ----
    # C = -(1/(D Gamma(-a))) sum u0n Phi_n / lambda_n; the mode sum equals
    # x0 (L - x0) / 2 = 1/8, so C = 1/(16 sqrt(pi)).
    Cval = mpf(1) / (16 * sqrt(pi))
    print("pub const TAIL_CONSTANT_CENTER_ALPHA05: f64 = %s; // 1/(16 sqrt(pi))" % rust17(Cval))
    print("pub const MODE_SUM_INV_LAMBDA_X03: f64 = 0.105; // 0.3*0.7/2, exact")
    print()

    # ---- 2D classical factorisation check value ----
    progress("2d classical")
    mp.dps = 30
    tt = mpf("0.05")

    def u1(x0_, x_, t_):
        return nsum(lambda n: 2 * sin(n * pi * x0_) * sin(n * pi * x_)
                    * exp(-n ** 2 * pi ** 2 * t_), [1, inf])

    u2d = u1(mpf("0.4"), mpf("0.35"), tt) * u1(mpf("0.55"), mpf("0.6"), tt)
    print("// classical 2D field at (0.35, 0.6), source (0.4, 0.55), t = 0.05 (1D product)")
    print("pub const CLASSICAL_FIELD_2D: f64 = %s;" % rust17(u2d))
    progress("done")


if __name__ == "__main__":
    main()
