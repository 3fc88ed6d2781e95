//! Dirichlet eigen-system of the Laplacian on a d-dimensional box:
//! eigenvalues, eigenfunctions, their integrals over the box, and
//! projections of initial conditions onto the mode basis.
//!
//! On `Ω = [0,L_1] × … × [0,L_d]` with absorbing (Dirichlet) boundaries,
//! the eigenfunctions factor per axis,
//! `φ_n(r) = Π_i √(2/L_i) sin(π n_i x_i / L_i)` with eigenvalues
//! `λ_n = Σ_i π² n_i² / L_i²`, indexed by a tuple of positive integers.
//! The box integral `Φ_n = ∫_Ω φ_n` is `Π_i 2√(2 L_i)/(π n_i)` when every
//! `n_i` is odd and exactly zero otherwise — even modes carry no net mass
//! and drop out of survival-type quantities.
//!
//! Mode sets are truncated by an eigenvalue ball `λ_n ≤ λ_max` (see
//! [`SeriesPolicy`](crate::policy::SeriesPolicy)) and returned sorted by
//! ascending eigenvalue so downstream summation order is deterministic.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gamma::sin_pi;
use crate::policy::SeriesPolicy;
use crate::quad::{GaussLegendre, NeumaierSum};

/// Axis-aligned box with absorbing boundaries and a constant generalized
/// diffusion coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lengths: Vec<f64>,
    diffusion: f64,
}

impl BoxDomain {
    /// Validates side lengths (`> 0`, finite) and diffusion (`> 0`, finite).
    pub fn new(lengths: Vec<f64>, diffusion: f64) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::InvalidParameter(
                "domain needs at least one axis".into(),
            ));
        }
        for (i, &l) in lengths.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "side length L_{} must be positive and finite, got {l}",
                    i + 1
                )));
            }
        }
        if !(diffusion.is_finite() && diffusion > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "diffusion coefficient must be positive and finite, got {diffusion}"
            )));
        }
        Ok(BoxDomain { lengths, diffusion })
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// `r` in the closed box (boundary included)?
    pub fn contains(&self, r: &[f64]) -> bool {
        r.len() == self.dim() && r.iter().zip(&self.lengths).all(|(&x, &l)| x >= 0.0 && x <= l)
    }

    /// `r` strictly inside the box?
    pub fn is_interior(&self, r: &[f64]) -> bool {
        r.len() == self.dim() && r.iter().zip(&self.lengths).all(|(&x, &l)| x > 0.0 && x < l)
    }
}

/// Mode label: one positive integer per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    n: Vec<usize>,
}

impl MultiIndex {
    pub fn new(n: Vec<usize>) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::InvalidParameter(
                "mode index needs at least one axis".into(),
            ));
        }
        if n.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "mode indices start at 1, got {n:?}"
            )));
        }
        Ok(MultiIndex { n })
    }

    pub fn indices(&self) -> &[usize] {
        &self.n
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    /// True when every per-axis index is odd (the modes with nonzero box
    /// integral).
    pub fn all_odd(&self) -> bool {
        self.n.iter().all(|&k| k % 2 == 1)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.n.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// `λ_n = Σ_i π² n_i² / L_i²`.
///
/// Panics if the index dimension does not match the domain.
pub fn eigenvalue(domain: &BoxDomain, n: &MultiIndex) -> f64 {
    assert_eq!(n.dim(), domain.dim(), "mode index dimension mismatch");
    let mut sum = 0.0;
    for (&k, &l) in n.indices().iter().zip(domain.lengths()) {
        let f = std::f64::consts::PI * k as f64 / l;
        sum += f * f;
    }
    sum
}

/// `φ_n(r) = Π_i √(2/L_i) sin(π n_i x_i / L_i)`; exactly zero on the
/// boundary (the sine is evaluated through an argument-reduced `sin(πy)`
/// that vanishes at integers).
pub fn eigenfunction(domain: &BoxDomain, n: &MultiIndex, r: &[f64]) -> Result<f64> {
    assert_eq!(n.dim(), domain.dim(), "mode index dimension mismatch");
    if !domain.contains(r) {
        return Err(Error::PointOutsideDomain);
    }
    Ok(eigenfunction_unchecked(domain, n.indices(), r))
}

/// Same product formula without the membership check (hot path; callers
/// guarantee `r` lies in the closed box).
pub(crate) fn eigenfunction_unchecked(domain: &BoxDomain, n: &[usize], r: &[f64]) -> f64 {
    let mut prod = 1.0;
    for ((&k, &x), &l) in n.iter().zip(r).zip(domain.lengths()) {
        prod *= (2.0 / l).sqrt() * sin_pi(k as f64 * x / l);
    }
    prod
}

/// `Φ_n = ∫_Ω φ_n dr = Π_i 2√(2 L_i)/(π n_i)` for all-odd indices, zero
/// otherwise.
pub fn boundary_integral(domain: &BoxDomain, n: &MultiIndex) -> f64 {
    assert_eq!(n.dim(), domain.dim(), "mode index dimension mismatch");
    if !n.all_odd() {
        return 0.0;
    }
    let mut prod = 1.0;
    for (&k, &l) in n.indices().iter().zip(domain.lengths()) {
        prod *= 2.0 * (2.0 * l).sqrt() / (std::f64::consts::PI * k as f64);
    }
    prod
}

/// Shared evaluation closure for density initial conditions.
pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Initial condition of the diffusion problem.
#[derive(Clone)]
pub enum InitialCondition {
    /// Point mass at a strictly interior location.
    DeltaPeak { r0: Vec<f64> },
    /// Smooth density, normalized to unit mass over the box (checked by
    /// quadrature at validation time, tolerance 1e-6).
    Density { f: DensityFn, label: String },
}

impl fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::DeltaPeak { r0 } => write!(f, "DeltaPeak {{ r0: {r0:?} }}"),
            InitialCondition::Density { label, .. } => {
                write!(f, "Density {{ label: {label:?} }}")
            }
        }
    }
}

impl InitialCondition {
    pub fn delta(r0: Vec<f64>) -> Self {
        InitialCondition::DeltaPeak { r0 }
    }

    pub fn density(f: DensityFn, label: impl Into<String>) -> Self {
        InitialCondition::Density {
            f,
            label: label.into(),
        }
    }

    /// Isotropic Gaussian centered at `center` with width `sigma`,
    /// normalized to unit mass *on the box* (per-axis error-function
    /// normalization, so truncation by the box walls is accounted for
    /// exactly). This is the standard mollified stand-in for a point mass
    /// when a smooth initial condition is required.
    pub fn gaussian(domain: &BoxDomain, center: &[f64], sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mollification width must be positive, got {sigma}"
            )));
        }
        if !domain.is_interior(center) {
            return Err(Error::InvalidParameter(format!(
                "mollified peak center {center:?} must lie strictly inside the box"
            )));
        }
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut norm = 1.0;
        for (&c, &l) in center.iter().zip(domain.lengths()) {
            norm *= sigma
                * (std::f64::consts::PI / 2.0).sqrt()
                * (libm::erf((l - c) / (sigma * sqrt2)) + libm::erf(c / (sigma * sqrt2)));
        }
        let center_owned = center.to_vec();
        let label = format!("gaussian(center={center_owned:?}, sigma={sigma})");
        let f: DensityFn = Arc::new(move |r: &[f64]| {
            let mut q = 0.0;
            for (&x, &c) in r.iter().zip(&center_owned) {
                q += (x - c) * (x - c);
            }
            (-q / (2.0 * sigma * sigma)).exp() / norm
        });
        Ok(InitialCondition::Density { f, label })
    }

    /// Checks the initial condition against a domain: delta peaks must be
    /// strictly interior; densities must integrate to one over the box
    /// within 1e-6.
    pub fn validate(&self, domain: &BoxDomain) -> Result<()> {
        match self {
            InitialCondition::DeltaPeak { r0 } => {
                if r0.len() != domain.dim() {
                    return Err(Error::InvalidParameter(format!(
                        "initial peak {r0:?} has wrong dimension for a {}-d box",
                        domain.dim()
                    )));
                }
                if !domain.is_interior(r0) {
                    return Err(Error::InvalidParameter(format!(
                        "initial peak {r0:?} must lie strictly inside the box"
                    )));
                }
                Ok(())
            }
            InitialCondition::Density { .. } => {
                let mut proj = DensityProjector::new(domain, self);
                let ones = vec![1usize; domain.dim()];
                let mass = proj.integrate_against(&ones, true)?;
                if (mass - 1.0).abs() > 1e-6 {
                    return Err(Error::DensityNotNormalized { integral: mass });
                }
                Ok(())
            }
        }
    }
}

/// `u_{0,n} = ∫_Ω φ_n(r) u_0(r) dr`: closed form for delta peaks,
/// order-doubling tensor Gauss–Legendre quadrature (absolute tolerance
/// 1e-8) for densities.
pub fn project_initial(domain: &BoxDomain, ic: &InitialCondition, n: &MultiIndex) -> Result<f64> {
    assert_eq!(n.dim(), domain.dim(), "mode index dimension mismatch");
    match ic {
        InitialCondition::DeltaPeak { r0 } => {
            if !domain.is_interior(r0) {
                return Err(Error::InvalidParameter(format!(
                    "initial peak {r0:?} must lie strictly inside the box"
                )));
            }
            Ok(eigenfunction_unchecked(domain, n.indices(), r0))
        }
        InitialCondition::Density { .. } => {
            DensityProjector::new(domain, ic).integrate_against(n.indices(), false)
        }
    }
}

/// Tensor-product Gauss–Legendre integrator for `∫ φ_n · f` that caches
/// the (mode-independent) density samples per quadrature order, so
/// projecting many modes against the same density reuses every `f`
/// evaluation.
struct DensityProjector<'a> {
    domain: &'a BoxDomain,
    ic: &'a InitialCondition,
    cache: HashMap<usize, CachedGrid>,
}

struct CachedGrid {
    /// Per-axis nodes mapped to `[0, L_i]`.
    axis_nodes: Vec<Vec<f64>>,
    /// Flattened `f(x) · Π_i w_i` over the tensor grid, first axis fastest.
    weighted_f: Vec<f64>,
}

impl<'a> DensityProjector<'a> {
    fn new(domain: &'a BoxDomain, ic: &'a InitialCondition) -> Self {
        DensityProjector {
            domain,
            ic,
            cache: HashMap::new(),
        }
    }

    /// Integrates `f` against the eigenfunction with per-axis frequencies
    /// `n` (or against 1 when `against_one`), doubling the order until two
    /// successive levels agree to 1e-8 absolute.
    fn integrate_against(&mut self, n: &[usize], against_one: bool) -> Result<f64> {
        let n_max = n.iter().copied().max().unwrap_or(1);
        let mut order = (2 * n_max).max(16);
        let mut prev = self.at_order(order, n, against_one);
        while order < 2048 {
            order *= 2;
            let cur = self.at_order(order, n, against_one);
            if (cur - prev).abs() < 1e-8 {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::QuadratureNonConvergence(format!(
            "density projection onto mode {n:?} did not settle to 1e-8 by order 2048"
        )))
    }

    fn at_order(&mut self, order: usize, n: &[usize], against_one: bool) -> f64 {
        let d = self.domain.dim();
        if !self.cache.contains_key(&order) {
            let grid = build_grid(self.domain, self.ic, order);
            self.cache.insert(order, grid);
        }
        let grid = &self.cache[&order];
        // Per-axis eigenfunction samples at the cached nodes.
        let axis_fn: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let l = self.domain.lengths()[i];
                grid.axis_nodes[i]
                    .iter()
                    .map(|&x| {
                        if against_one {
                            1.0
                        } else {
                            (2.0 / l).sqrt() * sin_pi(n[i] as f64 * x / l)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut sum = NeumaierSum::new();
        let mut idx = vec![0usize; d];
        for &fw in &grid.weighted_f {
            let mut prod = fw;
            for i in 0..d {
                prod *= axis_fn[i][idx[i]];
            }
            sum.add(prod);
            // Mixed-radix increment, first axis fastest (matches the
            // flattening order in `build_grid`).
            for k in idx.iter_mut() {
                *k += 1;
                if *k < order {
                    break;
                }
                *k = 0;
            }
        }
        sum.value()
    }
}

fn build_grid(domain: &BoxDomain, ic: &InitialCondition, order: usize) -> CachedGrid {
    let f = match ic {
        InitialCondition::Density { f, .. } => f,
        InitialCondition::DeltaPeak { .. } => unreachable!("delta peaks project in closed form"),
    };
    let rule = GaussLegendre::new(order);
    let d = domain.dim();
    let mut axis_nodes = Vec::with_capacity(d);
    let mut axis_weights = Vec::with_capacity(d);
    for &l in domain.lengths() {
        let nodes: Vec<f64> = rule.nodes().iter().map(|&z| 0.5 * l * (z + 1.0)).collect();
        let weights: Vec<f64> = rule.weights().iter().map(|&w| 0.5 * l * w).collect();
        axis_nodes.push(nodes);
        axis_weights.push(weights);
    }
    let total = order.pow(d as u32);
    let mut weighted_f = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0f64; d];
    for _ in 0..total {
        let mut w = 1.0;
        for i in 0..d {
            point[i] = axis_nodes[i][idx[i]];
            w *= axis_weights[i][idx[i]];
        }
        weighted_f.push(w * f(&point));
        for k in idx.iter_mut() {
            *k += 1;
            if *k < order {
                break;
            }
            *k = 0;
        }
    }
    CachedGrid {
        axis_nodes,
        weighted_f,
    }
}

/// One retained mode of the spectral expansion.
#[derive(Debug, Clone)]
pub struct Mode {
    pub index: MultiIndex,
    /// Eigenvalue `λ_n`.
    pub lambda: f64,
    /// Initial-condition projection `u_{0,n}`.
    pub u0n: f64,
    /// Box integral `Φ_n` of the eigenfunction.
    pub phi_integral: f64,
}

/// The truncated eigen-expansion: modes with `λ_n ≤ λ_max`, sorted by
/// ascending eigenvalue (ties broken lexicographically by index), with
/// projections and box integrals precomputed. Immutable once built.
#[derive(Debug, Clone)]
pub struct SpectralCoefficients {
    modes: Vec<Mode>,
}

impl SpectralCoefficients {
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Smallest retained eigenvalue (the slowest-decaying mode).
    pub fn min_lambda(&self) -> f64 {
        self.modes[0].lambda
    }

    /// Largest retained eigenvalue.
    pub fn max_lambda(&self) -> f64 {
        self.modes[self.modes.len() - 1].lambda
    }

    /// `Σ_n u_{0,n} Φ_n e^{-ε λ_n}`: the exponentially regularized mass of
    /// the expansion. As `ε → 0⁺` this tends to the initial mass (1 for
    /// normalized data); the mode sum at `ε = 0` is only conditionally
    /// convergent for point initial data, so completeness is checked
    /// through this regularization rather than by direct summation.
    pub fn damped_mass(&self, epsilon: f64) -> f64 {
        let mut sum = NeumaierSum::new();
        for m in &self.modes {
            sum.add(m.u0n * m.phi_integral * (-epsilon * m.lambda).exp());
        }
        sum.value()
    }
}

/// Enumerates all modes with `λ_n ≤ policy.lambda_max`, computes their
/// projections against `ic`, and returns them sorted by ascending
/// eigenvalue. The per-axis scan range is never smaller than
/// `policy.min_modes_per_axis`. Requires an explicit `lambda_max` (the
/// scenario layer resolves defaults before calling).
///
/// Fails with [`Error::ModeBudgetExceeded`] when the ball contains more
/// than `policy.max_modes` modes, and with [`Error::InvalidParameter`]
/// when it contains none.
pub fn enumerate_modes(
    domain: &BoxDomain,
    ic: &InitialCondition,
    policy: &SeriesPolicy,
) -> Result<SpectralCoefficients> {
    policy.validate()?;
    let lambda_max = policy.lambda_max.ok_or_else(|| {
        Error::InvalidParameter(
            "mode enumeration needs a concrete lambda_max (resolve the policy first)".into(),
        )
    })?;
    let d = domain.dim();
    // Per-axis scan bound: the largest k with π²k²/L² ≤ λ_max, floored at
    // min_modes_per_axis.
    let bounds: Vec<usize> = domain
        .lengths()
        .iter()
        .map(|&l| {
            let k = (l * lambda_max.sqrt() / std::f64::consts::PI).floor() as usize;
            k.max(policy.min_modes_per_axis)
        })
        .collect();

    let mut kept: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut overflow = 0usize;
    let mut idx = vec![1usize; d];
    'outer: loop {
        let mi = MultiIndex { n: idx.clone() };
        let lambda = eigenvalue(domain, &mi);
        if lambda <= lambda_max {
            if kept.len() < policy.max_modes {
                kept.push((idx.clone(), lambda));
            } else {
                overflow += 1;
            }
        }
        for k in 0..d {
            idx[k] += 1;
            if idx[k] <= bounds[k] {
                continue 'outer;
            }
            idx[k] = 1;
        }
        break;
    }
    if overflow > 0 {
        return Err(Error::ModeBudgetExceeded {
            needed: kept.len() + overflow,
            cap: policy.max_modes,
        });
    }
    if kept.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "lambda_max = {lambda_max} lies below the smallest eigenvalue of the box"
        )));
    }
    kept.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));

    let mut projector = DensityProjector::new(domain, ic);
    let mut modes = Vec::with_capacity(kept.len());
    for (n, lambda) in kept {
        let mi = MultiIndex { n };
        let u0n = match ic {
            InitialCondition::DeltaPeak { r0 } => {
                eigenfunction_unchecked(domain, mi.indices(), r0)
            }
            InitialCondition::Density { .. } => {
                projector.integrate_against(mi.indices(), false)?
            }
        };
        let phi_integral = boundary_integral(domain, &mi);
        modes.push(Mode {
            index: mi,
            lambda,
            u0n,
            phi_integral,
        });
    }
    Ok(SpectralCoefficients { modes })
}
