//! Resolvents, proximable functions and bounded linear maps.
//!
//! Operators are represented by their oracles. All oracles are pure and
//! `Send + Sync`, so blocks can be evaluated concurrently.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::block::{dot, norm, sub};
use crate::error::{invalid, Error, Result};
use crate::par::map_global;
use crate::sampling::GaussianSampler;
use crate::spectral::{matrix_norm, PowerIterationOptions};

pub type ResolventFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;
pub type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
pub type MapFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A maximal monotone operator `A` known through `(gamma, x) -> J_{gamma A} x`.
#[derive(Clone)]
pub struct Resolvent {
    dim: usize,
    oracle: Arc<ResolventFn>,
}

impl fmt::Debug for Resolvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Resolvent").field("dim", &self.dim).finish()
    }
}

impl Resolvent {
    pub fn new<F>(dim: usize, oracle: F) -> Result<Self>
    where
        F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        Ok(Self {
            dim,
            oracle: Arc::new(oracle),
        })
    }

    /// Resolvent of the zero operator.
    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(dim, |_, x| x.to_vec())
    }

    /// Resolvent of the normal cone of `{point}`: the constant map.
    pub fn constant(point: Vec<f64>) -> Result<Self> {
        let dim = point.len();
        Self::new(dim, move |_, _| point.clone())
    }

    /// Resolvent of `c * Id` with `c >= 0`: `x / (1 + gamma c)`.
    pub fn scaled_identity(dim: usize, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(invalid("c", "must be nonnegative"));
        }
        Self::new(dim, move |g, x| x.iter().map(|v| v / (1.0 + g * c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, gamma: f64, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.oracle)(gamma, x)
    }
}

/// A function in `Gamma_0` known through its proximity operator and,
/// optionally, its values.
#[derive(Clone)]
pub struct ProxFunction {
    dim: usize,
    prox: Arc<ResolventFn>,
    value: Option<Arc<ValueFn>>,
}

impl fmt::Debug for ProxFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProxFunction")
            .field("dim", &self.dim)
            .field("has_value", &self.value.is_some())
            .finish()
    }
}

impl ProxFunction {
    pub fn new<F>(dim: usize, prox: F) -> Result<Self>
    where
        F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        Ok(Self {
            dim,
            prox: Arc::new(prox),
            value: None,
        })
    }

    pub fn with_value<V>(mut self, value: V) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.value = Some(Arc::new(value));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `prox_{gamma f}(x)`.
    pub fn prox(&self, gamma: f64, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.prox)(gamma, x)
    }

    /// `f(x)`, possibly `+inf`; `None` when no value oracle was supplied.
    pub fn value(&self, x: &[f64]) -> Option<f64> {
        self.value.as_ref().map(|v| v(x))
    }

    pub fn has_value(&self) -> bool {
        self.value.is_some()
    }

    /// `prox_{gamma f} = J_{gamma df}`.
    pub fn to_resolvent(&self) -> Resolvent {
        Resolvent {
            dim: self.dim,
            oracle: self.prox.clone(),
        }
    }
}

/// Views `f` as the maximal monotone operator `df`.
pub fn prox_to_resolvent(f: &ProxFunction) -> Resolvent {
    f.to_resolvent()
}

/// A bounded linear map `R^domain -> R^codomain` with an upper bound on its
/// operator norm.
#[derive(Clone)]
pub struct LinearMap {
    domain: usize,
    codomain: usize,
    forward: Arc<MapFn>,
    adjoint: Arc<MapFn>,
    norm_bound: f64,
    /// Set for maps known to vanish, so constructors can skip them.
    is_zero: bool,
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearMap")
            .field("domain", &self.domain)
            .field("codomain", &self.codomain)
            .field("norm_bound", &self.norm_bound)
            .finish()
    }
}

impl LinearMap {
    /// A map given by user oracles; `norm_bound` must bound `||L||` from above.
    pub fn from_oracles<F, G>(
        domain: usize,
        codomain: usize,
        forward: F,
        adjoint: G,
        norm_bound: f64,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if domain == 0 || codomain == 0 {
            return Err(invalid("dims", "linear maps need positive dimensions"));
        }
        if !(norm_bound >= 0.0) || !norm_bound.is_finite() {
            return Err(invalid("norm_bound", "must be finite and nonnegative"));
        }
        Ok(Self {
            domain,
            codomain,
            forward: Arc::new(forward),
            adjoint: Arc::new(adjoint),
            norm_bound,
            is_zero: false,
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Result<Self> {
        let mut map = Self::from_oracles(
            dim,
            dim,
            move |x| x.iter().map(|v| c * v).collect(),
            move |x| x.iter().map(|v| c * v).collect(),
            c.abs(),
        )?;
        map.is_zero = c == 0.0;
        Ok(map)
    }

    pub fn zero(domain: usize, codomain: usize) -> Result<Self> {
        let mut map = Self::from_oracles(
            domain,
            codomain,
            move |_| vec![0.0; codomain],
            move |_| vec![0.0; domain],
            0.0,
        )?;
        map.is_zero = true;
        Ok(map)
    }

    /// A dense matrix; its norm bound is the power-iteration spectral norm.
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        let norm = matrix_norm(&matrix, &PowerIterationOptions::default())?;
        Self::dense_with_bound(matrix, norm)
    }

    pub fn dense_with_bound(matrix: DMatrix<f64>, norm_bound: f64) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        let is_zero = matrix.iter().all(|v| *v == 0.0);
        let fwd = matrix.clone();
        let adj = matrix;
        let mut map = Self::from_oracles(
            cols,
            rows,
            move |x| (&fwd * DVector::from_column_slice(x)).as_slice().to_vec(),
            move |y| adj.tr_mul(&DVector::from_column_slice(y)).as_slice().to_vec(),
            norm_bound,
        )?;
        map.is_zero = is_zero;
        Ok(map)
    }

    /// Replaces the norm bound, e.g. with a looser analytic one.
    pub fn with_norm_bound(mut self, norm_bound: f64) -> Result<Self> {
        if !(norm_bound >= 0.0) || !norm_bound.is_finite() {
            return Err(invalid("norm_bound", "must be finite and nonnegative"));
        }
        self.norm_bound = norm_bound;
        Ok(self)
    }

    /// `-L`.
    pub fn neg(&self) -> Self {
        let f = self.forward.clone();
        let a = self.adjoint.clone();
        Self {
            domain: self.domain,
            codomain: self.codomain,
            forward: Arc::new(move |x| f(x).into_iter().map(|v| -v).collect()),
            adjoint: Arc::new(move |y| a(y).into_iter().map(|v| -v).collect()),
            norm_bound: self.norm_bound,
            is_zero: self.is_zero,
        }
    }

    /// `L^*`.
    pub fn adjoint_map(&self) -> Self {
        Self {
            domain: self.codomain,
            codomain: self.domain,
            forward: self.adjoint.clone(),
            adjoint: self.forward.clone(),
            norm_bound: self.norm_bound,
            is_zero: self.is_zero,
        }
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn is_known_zero(&self) -> bool {
        self.is_zero
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.domain);
        (self.forward)(x)
    }

    pub fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.codomain);
        (self.adjoint)(y)
    }

    /// Power-iteration estimate of the operator norm from the oracles.
    pub fn estimate_norm(&self, opts: &PowerIterationOptions) -> Result<f64> {
        operator_norm_of(self, opts)
    }

    /// Largest `|<Lx, y> - <x, L^*y>| / (||x|| ||y||)` and largest
    /// `||Lx|| / ||x|| - norm_bound` over Gaussian samples.
    pub fn check_consistency(&self, sampler: &GaussianSampler, n: usize) -> LinearMapReport {
        let rows = map_global(n, |k| {
            let mut rng = sampler.rng(k as u64);
            let x = sampler.vector(&mut rng, self.domain);
            let y = sampler.vector(&mut rng, self.codomain);
            let lx = self.apply(&x);
            let ly = self.apply_adjoint(&y);
            let (nx, ny) = (norm(&x), norm(&y));
            let adjoint_gap = (dot(&lx, &y) - dot(&x, &ly)).abs() / (nx * ny).max(f64::MIN_POSITIVE);
            let bound_excess = norm(&lx) / nx.max(f64::MIN_POSITIVE) - self.norm_bound;
            (adjoint_gap, bound_excess)
        });
        rows.into_iter().fold(
            LinearMapReport {
                max_adjoint_gap: 0.0,
                max_bound_excess: f64::NEG_INFINITY,
            },
            |acc, (g, e)| LinearMapReport {
                max_adjoint_gap: acc.max_adjoint_gap.max(g),
                max_bound_excess: acc.max_bound_excess.max(e),
            },
        )
    }
}

fn operator_norm_of(map: &LinearMap, opts: &PowerIterationOptions) -> Result<f64> {
    crate::spectral::operator_norm(map.domain, |x| map.apply(x), |y| map.apply_adjoint(y), opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMapReport {
    pub max_adjoint_gap: f64,
    pub max_bound_excess: f64,
}

/// Result of sampling `||Jx - Jy||^2 - <x - y, Jx - Jy>` over random pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirmNonexpansivenessReport {
    pub samples: usize,
    /// Largest raw violation; nonpositive for a firmly nonexpansive map.
    pub max_violation: f64,
    /// Largest violation divided by `1 + max(||x||^2, ||y||^2)`.
    pub max_relative_violation: f64,
}

impl FirmNonexpansivenessReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_relative_violation <= tol
    }
}

/// Samples `n_samples` Gaussian pairs and reports the worst violation of firm
/// nonexpansiveness of `x -> J_{gamma A} x`.
pub fn check_firmly_nonexpansive(
    op: &Resolvent,
    gamma: f64,
    sampler: &GaussianSampler,
    n_samples: usize,
) -> Result<FirmNonexpansivenessReport> {
    check_map_firmly_nonexpansive(op.dim(), |x| op.apply(gamma, x), sampler, n_samples)
}

/// Same check for an arbitrary single-valued map on `R^dim`.
pub fn check_map_firmly_nonexpansive<F>(
    dim: usize,
    map: F,
    sampler: &GaussianSampler,
    n_samples: usize,
) -> Result<FirmNonexpansivenessReport>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync + Send,
{
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    let rows = map_global(n_samples, |k| {
        let (x, y) = sampler.pair(k as u64, dim);
        let jx = map(&x);
        let jy = map(&y);
        let dj = sub(&jx, &jy);
        let dx = sub(&x, &y);
        let v = dot(&dj, &dj) - dot(&dx, &dj);
        let scale = 1.0 + dot(&x, &x).max(dot(&y, &y));
        (v, v / scale)
    });
    let (max_violation, max_relative_violation) = rows
        .into_iter()
        .fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |(a, b), (v, r)| {
            (a.max(v), b.max(r))
        });
    Ok(FirmNonexpansivenessReport {
        samples: n_samples,
        max_violation,
        max_relative_violation,
    })
}

pub(crate) fn check_len(block: usize, got: &[f64], expected: usize) -> Result<()> {
    if got.len() != expected {
        return Err(Error::Oracle {
            block,
            reason: format!("returned {} coordinates, expected {expected}", got.len()),
        });
    }
    if let Some(j) = got.iter().position(|v| !v.is_finite()) {
        return Err(Error::Oracle {
            block,
            reason: format!("non-finite coordinate at index {j}"),
        });
    }
    Ok(())
}
