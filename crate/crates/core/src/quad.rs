//! Gauss-Legendre quadrature: fixed-order panels, order doubling, and a
//! globally budgeted adaptive scheme.
//!
//! Everything in the engine that cannot be summed in closed form runs
//! through this module: the integral representation inside the
//! Mittag-Leffler evaluator, initial-density projections, and the
//! first-passage time integrals. The adaptive scheme reports an error
//! estimate so callers can propagate honest uncertainty.

use crate::error::{Error, Result};

/// Gauss-Legendre rule of fixed order on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the order-`n` rule via Newton iteration on the Legendre
    /// recurrence. Nodes converge to ~1 ulp in at most a handful of steps.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Symmetric rule: solve for the non-negative half and mirror.
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th root (descending order).
            let mut x =
                (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (p2, d2) = legendre_and_derivative(n, x);
                    dp = d2;
                    x -= p2 / d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            // Enforce the exact central node.
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes on `[-1, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights matching [`Self::nodes`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]` with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = NeumaierSum::new();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * x));
        }
        half * acc.value()
    }
}

/// `(P_n(x), P_n'(x))` by upward recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Compensated (Neumaier) accumulator; used everywhere a mode or term sum
/// must be reproducible to the last bit regardless of length.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Integrates `f` on `[a, b]` by doubling the panel order until two
/// successive estimates agree within `tol` (absolute). Starts at
/// `order_start` and gives up beyond `order_max`.
pub fn integrate_doubling<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    order_start: usize,
    order_max: usize,
) -> Result<f64> {
    let mut order = order_start.max(4);
    let mut prev = GaussLegendre::new(order).integrate(a, b, &mut f);
    while order <= order_max {
        order *= 2;
        let cur = GaussLegendre::new(order).integrate(a, b, &mut f);
        if (cur - prev).abs() <= tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNonConvergence(format!(
        "order doubling exceeded {order_max} points on [{a}, {b}] without \
         reaching tol={tol}"
    )))
}

/// Result of an adaptive integration: the value and an error estimate that
/// sums the accepted per-interval refinement discrepancies.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult {
    pub value: f64,
    pub error_estimate: f64,
}

const ADAPTIVE_ORDER: usize = 15;
const MAX_PANELS: usize = 40_000;

/// Adaptively integrates `f` over the consecutive spans of `splits`
/// (an ascending list of breakpoints; panels never straddle one), accepting
/// a panel when bisecting it moves the estimate by less than its share of
/// `tol` (absolute, distributed by length).
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    splits: &[f64],
    tol: f64,
) -> Result<AdaptiveResult> {
    assert!(splits.len() >= 2, "need at least one interval");
    assert!(
        splits.windows(2).all(|w| w[0] < w[1]),
        "breakpoints must be strictly ascending"
    );
    let rule = GaussLegendre::new(ADAPTIVE_ORDER);
    let total_len = splits[splits.len() - 1] - splits[0];
    let mut stack: Vec<(f64, f64, f64)> = Vec::new();
    for w in splits.windows(2).rev() {
        let coarse = rule.integrate(w[0], w[1], &mut f);
        stack.push((w[0], w[1], coarse));
    }
    let mut value = NeumaierSum::new();
    let mut err = NeumaierSum::new();
    let mut panels = 0usize;
    while let Some((a, b, coarse)) = stack.pop() {
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::QuadratureNonConvergence(format!(
                "adaptive integration exceeded {MAX_PANELS} panels at tol={tol}"
            )));
        }
        let m = 0.5 * (a + b);
        let left = rule.integrate(a, m, &mut f);
        let right = rule.integrate(m, b, &mut f);
        let fine = left + right;
        let disc = (fine - coarse).abs();
        let local_tol = tol * ((b - a) / total_len).max(1e-12);
        if disc <= local_tol || (b - a) <= 1e-14 * total_len {
            value.add(fine);
            err.add(disc);
        } else {
            stack.push((m, b, right));
            stack.push((a, m, left));
        }
    }
    Ok(AdaptiveResult {
        value: value.value(),
        error_estimate: err.value(),
    })
}
