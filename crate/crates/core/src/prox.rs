//! Projections, proximity operators and gradients of smooth coupling terms.

use std::fmt;
use std::sync::Arc;

use crate::block::{dot, norm, sub};
use crate::error::{invalid, Error, Result};
use crate::operator::{MapFn, ProxFunction, ValueFn};

/// A nonempty closed convex subset of `R^n` with a closed-form projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSet {
    kind: SetKind,
}

#[derive(Debug, Clone, PartialEq)]
enum SetKind {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// `<a, x> <= b`
    Halfspace { a: Vec<f64>, b: f64 },
    /// `<a, x> = b`
    Hyperplane { a: Vec<f64>, b: f64 },
    Singleton(Vec<f64>),
    /// `{x >= 0 : sum_{l in groups[k]} x_l = masses[k]}`
    ScaledSimplex {
        dim: usize,
        groups: Vec<Vec<usize>>,
        masses: Vec<f64>,
    },
    /// `origin + span(basis)`, basis orthonormal.
    Affine { origin: Vec<f64>, basis: Vec<Vec<f64>> },
}

impl ConvexSet {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Dimension("box bounds must have equal positive length".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(invalid("box", "requires lo <= hi componentwise"));
        }
        Ok(Self {
            kind: SetKind::Box { lo, hi },
        })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::Dimension("ball center is empty".into()));
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(invalid("radius", "must be finite and nonnegative"));
        }
        Ok(Self {
            kind: SetKind::Ball { center, radius },
        })
    }

    pub fn halfspace(a: Vec<f64>, b: f64) -> Result<Self> {
        check_normal(&a)?;
        Ok(Self {
            kind: SetKind::Halfspace { a, b },
        })
    }

    pub fn hyperplane(a: Vec<f64>, b: f64) -> Result<Self> {
        check_normal(&a)?;
        Ok(Self {
            kind: SetKind::Hyperplane { a, b },
        })
    }

    pub fn singleton(point: Vec<f64>) -> Result<Self> {
        if point.is_empty() {
            return Err(Error::Dimension("singleton point is empty".into()));
        }
        Ok(Self {
            kind: SetKind::Singleton(point),
        })
    }

    /// Product of scaled simplexes: coordinates are nonnegative and the
    /// coordinates of group `k` sum to `masses[k]`. Coordinates outside every
    /// group are only constrained to be nonnegative.
    pub fn scaled_simplex(dim: usize, groups: Vec<Vec<usize>>, masses: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        if groups.len() != masses.len() {
            return Err(Error::Dimension(format!(
                "{} groups but {} masses",
                groups.len(),
                masses.len()
            )));
        }
        let mut seen = vec![false; dim];
        for (k, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(invalid("groups", format!("group {k} is empty")));
            }
            for &l in g {
                if l >= dim {
                    return Err(invalid("groups", format!("index {l} out of range in group {k}")));
                }
                if seen[l] {
                    return Err(invalid("groups", format!("index {l} appears in two groups")));
                }
                seen[l] = true;
            }
        }
        if masses.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(invalid("masses", "must be finite and nonnegative"));
        }
        Ok(Self {
            kind: SetKind::ScaledSimplex { dim, groups, masses },
        })
    }

    /// The probability simplex of `R^dim`.
    pub fn simplex(dim: usize) -> Result<Self> {
        Self::scaled_simplex(dim, vec![(0..dim).collect()], vec![1.0])
    }

    /// `origin + span(basis)`; the basis is orthonormalised and dependent
    /// directions are dropped.
    pub fn affine(origin: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<Self> {
        if origin.is_empty() {
            return Err(Error::Dimension("affine origin is empty".into()));
        }
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        for v in basis {
            if v.len() != origin.len() {
                return Err(Error::Dimension("basis vector length differs from origin".into()));
            }
            let scale = norm(&v);
            let mut w = v;
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for q in &ortho {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let n = norm(&w);
            if n > 1e-12 * scale.max(1.0) {
                ortho.push(w.into_iter().map(|c| c / n).collect());
            }
        }
        Ok(Self {
            kind: SetKind::Affine {
                origin,
                basis: ortho,
            },
        })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::Box { lo, .. } => lo.len(),
            SetKind::Ball { center, .. } => center.len(),
            SetKind::Halfspace { a, .. } | SetKind::Hyperplane { a, .. } => a.len(),
            SetKind::Singleton(p) => p.len(),
            SetKind::ScaledSimplex { dim, .. } => *dim,
            SetKind::Affine { origin, .. } => origin.len(),
        }
    }

    /// `P_S x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim());
        match &self.kind {
            SetKind::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| v.max(*l).min(*h))
                .collect(),
            SetKind::Ball { center, radius } => {
                let d = sub(x, center);
                let n = norm(&d);
                if n <= *radius {
                    x.to_vec()
                } else {
                    let s = radius / n;
                    center.iter().zip(&d).map(|(c, v)| c + s * v).collect()
                }
            }
            SetKind::Halfspace { a, b } => {
                let excess = dot(a, x) - b;
                if excess <= 0.0 {
                    x.to_vec()
                } else {
                    shift_along(x, a, excess)
                }
            }
            SetKind::Hyperplane { a, b } => shift_along(x, a, dot(a, x) - b),
            SetKind::Singleton(p) => p.clone(),
            SetKind::ScaledSimplex { groups, masses, .. } => {
                let mut out: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
                for (g, &mass) in groups.iter().zip(masses) {
                    let sub_x: Vec<f64> = g.iter().map(|&l| x[l]).collect();
                    let p = project_simplex(&sub_x, mass);
                    for (&l, v) in g.iter().zip(p) {
                        out[l] = v;
                    }
                }
                out
            }
            SetKind::Affine { origin, basis } => {
                let d = sub(x, origin);
                let mut out = origin.clone();
                for q in basis {
                    let c = dot(&d, q);
                    out.iter_mut().zip(q).for_each(|(o, v)| *o += c * v);
                }
                out
            }
        }
    }

    /// Distance from `x` to the set.
    pub fn distance(&self, x: &[f64]) -> f64 {
        norm(&sub(x, &self.project(x)))
    }

    /// Membership up to `tol * (1 + ||x||)`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim() && self.distance(x) <= tol * (1.0 + norm(x))
    }
}

fn check_normal(a: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Dimension("normal vector is empty".into()));
    }
    if dot(a, a) == 0.0 {
        return Err(invalid("a", "normal vector must be nonzero"));
    }
    Ok(())
}

fn shift_along(x: &[f64], a: &[f64], excess: f64) -> Vec<f64> {
    let t = excess / dot(a, a);
    x.iter().zip(a).map(|(v, c)| v - t * c).collect()
}

/// Projection onto `{w >= 0 : sum w = mass}` by sorting and thresholding.
/// `mass == 0` gives the zero vector.
pub fn project_simplex(u: &[f64], mass: f64) -> Vec<f64> {
    if mass == 0.0 {
        return vec![0.0; u.len()];
    }
    let mut sorted = u.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - mass) / (j + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    u.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Soft thresholding: `prox` of `weight * ||.||_1` with step `gamma`.
pub fn prox_l1(gamma: f64, weight: f64, x: &[f64]) -> Vec<f64> {
    let t = gamma * weight;
    x.iter().map(|v| v.signum() * (v.abs() - t).max(0.0)).collect()
}

/// `prox` of `1/2 ||. - z||^2` with step `gamma`.
pub fn prox_quadratic(gamma: f64, z: &[f64], x: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(z)
        .map(|(v, c)| (v + gamma * c) / (1.0 + gamma))
        .collect()
}

/// Gradient of `1/2 d_S^2`, i.e. `x - P_S x`.
pub fn grad_half_dist_sq(set: &ConvexSet, x: &[f64]) -> Vec<f64> {
    sub(x, &set.project(x))
}

/// Gradient of the Moreau envelope of `psi`: `x - prox_psi(x)`.
pub fn moreau_gradient(psi: &ProxFunction, x: &[f64]) -> Vec<f64> {
    sub(x, &psi.prox(1.0, x))
}

impl ProxFunction {
    /// The zero function.
    pub fn zero(dim: usize) -> Result<Self> {
        Ok(Self::new(dim, |_, x| x.to_vec())?.with_value(|_| 0.0))
    }

    /// The indicator of `set`; its prox is the projection for every step.
    pub fn indicator(set: ConvexSet) -> Self {
        let dim = set.dim();
        let set = Arc::new(set);
        let s2 = set.clone();
        Self::new(dim, move |_, x| set.project(x))
            .expect("sets have positive dimension")
            .with_value(move |x| if s2.contains(x, 1e-9) { 0.0 } else { f64::INFINITY })
    }

    /// `weight * ||.||_1`.
    pub fn l1(dim: usize, weight: f64) -> Result<Self> {
        if !(weight >= 0.0) {
            return Err(invalid("weight", "must be nonnegative"));
        }
        Ok(Self::new(dim, move |g, x| prox_l1(g, weight, x))?
            .with_value(move |x| weight * x.iter().map(|v| v.abs()).sum::<f64>()))
    }

    /// `1/2 ||. - z||^2`.
    pub fn half_sq_distance_to(z: Vec<f64>) -> Result<Self> {
        let dim = z.len();
        let z = Arc::new(z);
        let z2 = z.clone();
        Ok(Self::new(dim, move |g, x| prox_quadratic(g, &z, x))?
            .with_value(move |x| 0.5 * dot(&sub(x, &z2), &sub(x, &z2))))
    }

    /// `c/2 ||.||^2` with `c >= 0`.
    pub fn scaled_sq_norm(dim: usize, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(invalid("c", "must be nonnegative"));
        }
        Ok(Self::new(dim, move |g, x| x.iter().map(|v| v / (1.0 + g * c)).collect())?
            .with_value(move |x| 0.5 * c * dot(x, x)))
    }
}

/// A convex differentiable function whose gradient is `lipschitz`-Lipschitz.
#[derive(Clone)]
pub struct SmoothFunction {
    dim: usize,
    gradient: Arc<MapFn>,
    value: Option<Arc<ValueFn>>,
    lipschitz: f64,
}

impl fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFunction")
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl SmoothFunction {
    pub fn new<G>(dim: usize, lipschitz: f64, gradient: G) -> Result<Self>
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        if !(lipschitz > 0.0) || !lipschitz.is_finite() {
            return Err(invalid("lipschitz", "must be finite and positive"));
        }
        Ok(Self {
            dim,
            gradient: Arc::new(gradient),
            value: None,
            lipschitz,
        })
    }

    pub fn with_value<V>(mut self, value: V) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.value = Some(Arc::new(value));
        self
    }

    /// `c/2 ||.||^2`, gradient `c x`.
    pub fn scaled_half_sq_norm(dim: usize, c: f64) -> Result<Self> {
        Ok(Self::new(dim, c, move |x| x.iter().map(|v| c * v).collect())?
            .with_value(move |x| 0.5 * c * dot(x, x)))
    }

    /// `c ||. - z||^2`, gradient `2c (x - z)`.
    pub fn scaled_sq_distance_to(z: Vec<f64>, c: f64) -> Result<Self> {
        let dim = z.len();
        let z = Arc::new(z);
        let z2 = z.clone();
        Ok(
            Self::new(dim, 2.0 * c, move |x| {
                x.iter().zip(z.iter()).map(|(v, w)| 2.0 * c * (v - w)).collect()
            })?
            .with_value(move |x| {
                let d = sub(x, &z2);
                c * dot(&d, &d)
            }),
        )
    }

    /// Moreau envelope of `psi`; gradient `Id - prox_psi`, Lipschitz 1.
    pub fn moreau_envelope(psi: ProxFunction) -> Result<Self> {
        let dim = psi.dim();
        let psi = Arc::new(psi);
        let p2 = psi.clone();
        let f = Self::new(dim, 1.0, move |x| moreau_gradient(&psi, x))?;
        Ok(if p2.has_value() {
            f.with_value(move |x| {
                let p = p2.prox(1.0, x);
                let d = sub(x, &p);
                p2.value(&p).unwrap_or(f64::NAN) + 0.5 * dot(&d, &d)
            })
        } else {
            f
        })
    }

    /// `1/2 d_S^2`; gradient `Id - P_S`, Lipschitz 1.
    pub fn half_sq_distance_to_set(set: ConvexSet) -> Result<Self> {
        let dim = set.dim();
        let set = Arc::new(set);
        let s2 = set.clone();
        Ok(Self::new(dim, 1.0, move |x| grad_half_dist_sq(&set, x))?.with_value(move |x| {
            let d = s2.distance(x);
            0.5 * d * d
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.gradient)(x)
    }

    pub fn value(&self, x: &[f64]) -> Option<f64> {
        self.value.as_ref().map(|v| v(x))
    }

    pub fn has_value(&self) -> bool {
        self.value.is_some()
    }

    pub(crate) fn gradient_fn(&self) -> Arc<MapFn> {
        self.gradient.clone()
    }
}

/// Cost of transiting one link as a function of its total flow.
#[derive(Clone)]
pub struct LinkCost {
    cost: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    integral: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    lipschitz: f64,
}

impl fmt::Debug for LinkCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinkCost").field("lipschitz", &self.lipschitz).finish()
    }
}

impl LinkCost {
    /// A nondecreasing cost with declared Lipschitz constant.
    pub fn new<C>(lipschitz: f64, cost: C) -> Result<Self>
    where
        C: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lipschitz > 0.0) || !lipschitz.is_finite() {
            return Err(invalid("lipschitz", "must be finite and positive"));
        }
        Ok(Self {
            cost: Arc::new(cost),
            derivative: None,
            integral: None,
            lipschitz,
        })
    }

    /// `slope * h + intercept`, `slope > 0`.
    pub fn affine(slope: f64, intercept: f64) -> Result<Self> {
        if !(slope > 0.0) {
            return Err(invalid("slope", "link costs must be strictly increasing"));
        }
        Ok(Self::new(slope, move |h| slope * h + intercept)?
            .with_derivative(move |_| slope)
            .with_integral(move |h| 0.5 * slope * h * h + intercept * h))
    }

    pub fn with_derivative<D>(mut self, d: D) -> Self
    where
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    /// `h -> int_0^h cost`, used for objective values.
    pub fn with_integral<I>(mut self, i: I) -> Self
    where
        I: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.integral = Some(Arc::new(i));
        self
    }

    pub fn cost(&self, h: f64) -> f64 {
        (self.cost)(h)
    }

    pub fn derivative(&self, h: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(h))
    }

    pub fn integral(&self, h: f64) -> Option<f64> {
        self.integral.as_ref().map(|i| i(h))
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Gradient of `nu -> sum_j int_0^{nu_j} cost_j`, i.e. `(cost_j(nu_j))_j`.
pub fn traffic_potential_gradient(costs: &[LinkCost], flows: &[f64]) -> Vec<f64> {
    debug_assert_eq!(costs.len(), flows.len());
    costs.iter().zip(flows).map(|(c, &h)| c.cost(h)).collect()
}

/// Link potentials for the traffic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrafficPotential {
    /// `sum_j int_0^{nu_j} cost_j`; minimisers are Wardrop equilibria.
    Wardrop,
    /// `sum_j nu_j cost_j(nu_j)`; needs cost derivatives and a caller-supplied
    /// Lipschitz constant for its gradient.
    SocialOptimum { lipschitz: f64 },
}

/// The link potential as a smooth function on `R^links`.
pub fn traffic_potential(costs: Vec<LinkCost>, mode: TrafficPotential) -> Result<SmoothFunction> {
    if costs.is_empty() {
        return Err(invalid("costs", "network has no links"));
    }
    let dim = costs.len();
    let costs = Arc::new(costs);
    match mode {
        TrafficPotential::Wardrop => {
            let tau = costs.iter().map(LinkCost::lipschitz).fold(0.0, f64::max);
            let c1 = costs.clone();
            let f = SmoothFunction::new(dim, tau, move |nu| traffic_potential_gradient(&c1, nu))?;
            Ok(if costs.iter().all(|c| c.integral.is_some()) {
                f.with_value(move |nu| {
                    costs
                        .iter()
                        .zip(nu)
                        .map(|(c, &h)| c.integral(h).unwrap_or(f64::NAN))
                        .sum()
                })
            } else {
                f
            })
        }
        TrafficPotential::SocialOptimum { lipschitz } => {
            if costs.iter().any(|c| c.derivative.is_none()) {
                return Err(invalid("costs", "social optimum needs cost derivatives"));
            }
            let c1 = costs.clone();
            Ok(SmoothFunction::new(dim, lipschitz, move |nu| {
                c1.iter()
                    .zip(nu)
                    .map(|(c, &h)| c.cost(h) + h * c.derivative(h).unwrap_or(0.0))
                    .collect()
            })?
            .with_value(move |nu| costs.iter().zip(nu).map(|(c, &h)| h * c.cost(h)).sum()))
        }
    }
}
