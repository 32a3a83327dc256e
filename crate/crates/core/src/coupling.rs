//! Coupling operators `B = (B_1, ..., B_m)` with certified cocoercivity
//! constants.
//!
//! Every constructor computes `beta` from the structure of the operator. The
//! sampling check [`certify_cocoercivity`] audits a certificate empirically.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::block::{dot, BlockVector};
use crate::error::{invalid, Error, Result};
use crate::operator::{check_len, LinearMap, MapFn};
use crate::par::map_global;
use crate::prox::SmoothFunction;
use crate::sampling::GaussianSampler;
use crate::spectral::{matrix_norm, operator_norm, PowerIterationOptions};

pub type CouplingFn = dyn Fn(&BlockVector) -> Vec<Vec<f64>> + Send + Sync;

/// Which construction produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Frobenius,
    Spectral,
    Eigen,
    Structured,
    Composition,
    Gradient,
    Product,
    Manual,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Frobenius => "frobenius",
            Provenance::Spectral => "spectral",
            Provenance::Eigen => "eigen",
            Provenance::Structured => "structured",
            Provenance::Composition => "composition",
            Provenance::Gradient => "gradient",
            Provenance::Product => "product",
            Provenance::Manual => "manual",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A cocoercivity constant together with its origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    beta: f64,
    provenance: Provenance,
}

impl Certificate {
    pub fn new(beta: f64, provenance: Provenance) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(invalid("beta", format!("must be finite and positive, got {beta}")));
        }
        Ok(Self { beta, provenance })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Whether a linear grid is certified by the Frobenius bound or by the
/// spectral norm of the assembled operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearMode {
    Frobenius,
    Spectral,
}

/// A blockwise operator on the product space with a cocoercivity certificate.
#[derive(Clone)]
pub struct CouplingOperator {
    dims: Vec<usize>,
    apply: Arc<CouplingFn>,
    certificate: Certificate,
}

impl fmt::Debug for CouplingOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CouplingOperator")
            .field("dims", &self.dims)
            .field("certificate", &self.certificate)
            .finish()
    }
}

impl CouplingOperator {
    /// A user-defined coupling. The caller vouches for `certificate`.
    pub fn new<F>(dims: Vec<usize>, certificate: Certificate, apply: F) -> Result<Self>
    where
        F: Fn(&BlockVector) -> Vec<Vec<f64>> + Send + Sync + 'static,
    {
        check_dims(&dims)?;
        Ok(Self {
            dims,
            apply: Arc::new(apply),
            certificate,
        })
    }

    /// `B = 0`, which is cocoercive for every `beta`.
    pub fn zero(dims: Vec<usize>, beta: f64) -> Result<Self> {
        let certificate = Certificate::new(beta, Provenance::Manual)?;
        let d2 = dims.clone();
        Self::new(dims, certificate, move |_| d2.iter().map(|&d| vec![0.0; d]).collect())
    }

    /// Replaces the certificate by a manually chosen constant.
    pub fn with_manual_beta(mut self, beta: f64) -> Result<Self> {
        self.certificate = Certificate::new(beta, Provenance::Manual)?;
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    pub fn beta(&self) -> f64 {
        self.certificate.beta
    }

    /// `(B_1 x, ..., B_m x)`.
    pub fn apply(&self, x: &BlockVector) -> Result<BlockVector> {
        if !x.has_dims(&self.dims) {
            return Err(Error::Dimension(format!(
                "coupling expects blocks {:?}, got {:?}",
                self.dims,
                x.dims()
            )));
        }
        let out = (self.apply)(x);
        if out.len() != self.dims.len() {
            return Err(Error::Oracle {
                block: out.len().min(self.dims.len()),
                reason: format!("coupling returned {} blocks, expected {}", out.len(), self.dims.len()),
            });
        }
        let finite_input = x.blocks().iter().flatten().all(|v| v.is_finite());
        for (i, (b, &d)) in out.iter().zip(&self.dims).enumerate() {
            // non-finite outputs are only the oracle's fault for finite inputs
            if finite_input || b.len() != d {
                check_len(i, b, d)?;
            }
        }
        Ok(BlockVector::from_blocks_unchecked(out))
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::Dimension("a coupling needs at least one block".into()));
    }
    if let Some(i) = dims.iter().position(|&d| d == 0) {
        return Err(Error::Dimension(format!("block {i} is zero-dimensional")));
    }
    Ok(())
}

/// Checks a `p x m` grid of maps `L_ki: H_i -> G_k` and returns `(dims of H,
/// dims of G)`.
fn grid_shape(grid: &[Vec<LinearMap>]) -> Result<(Vec<usize>, Vec<usize>)> {
    let p = grid.len();
    if p == 0 {
        return Err(Error::Dimension("grid has no rows".into()));
    }
    let m = grid[0].len();
    if m == 0 {
        return Err(Error::Dimension("grid has no columns".into()));
    }
    if let Some(k) = grid.iter().position(|row| row.len() != m) {
        return Err(Error::Dimension(format!("grid row {k} has {} entries, expected {m}", grid[k].len())));
    }
    let dims: Vec<usize> = grid[0].iter().map(LinearMap::domain).collect();
    let codims: Vec<usize> = grid.iter().map(|row| row[0].codomain()).collect();
    for (k, row) in grid.iter().enumerate() {
        for (i, l) in row.iter().enumerate() {
            if l.domain() != dims[i] || l.codomain() != codims[k] {
                return Err(Error::Dimension(format!(
                    "grid entry ({k},{i}) maps R^{} -> R^{}, expected R^{} -> R^{}",
                    l.domain(),
                    l.codomain(),
                    dims[i],
                    codims[k]
                )));
            }
        }
    }
    Ok((dims, codims))
}

/// `sum_j L_kj x_j` for every row `k`.
fn grid_forward(grid: &[Vec<LinearMap>], codims: &[usize], x: &BlockVector) -> Vec<Vec<f64>> {
    grid.iter()
        .zip(codims)
        .map(|(row, &c)| {
            let mut s = vec![0.0; c];
            for (j, l) in row.iter().enumerate() {
                if l.is_known_zero() {
                    continue;
                }
                s.iter_mut().zip(l.apply(x.block(j))).for_each(|(a, b)| *a += b);
            }
            s
        })
        .collect()
}

/// `sum_k L_ki^* t_k` for every column `i`.
fn grid_adjoint(grid: &[Vec<LinearMap>], dims: &[usize], t: &[Vec<f64>]) -> Vec<Vec<f64>> {
    dims.iter()
        .enumerate()
        .map(|(i, &d)| {
            let mut s = vec![0.0; d];
            for (row, tk) in grid.iter().zip(t) {
                let l = &row[i];
                if l.is_known_zero() {
                    continue;
                }
                s.iter_mut().zip(l.apply_adjoint(tk)).for_each(|(a, b)| *a += b);
            }
            s
        })
        .collect()
}

/// `sum_i norm_bound(L_ki)^2` per row; errors on a vanishing row.
fn row_norms_sq(grid: &[Vec<LinearMap>]) -> Result<Vec<f64>> {
    let rows: Vec<f64> = grid
        .iter()
        .map(|row| row.iter().map(|l| l.norm_bound().powi(2)).sum())
        .collect();
    if let Some(k) = rows.iter().position(|s| *s <= 0.0) {
        return Err(Error::DegenerateCoupling(format!("row {k} of the grid consists of zero maps")));
    }
    Ok(rows)
}

const VALIDATION_SAMPLES: usize = 256;
const VALIDATION_TOL: f64 = 1e-9;

/// Samples the symmetry `M_ji = M_ij^*` and positivity hypotheses of a
/// square linear grid.
fn validate_linear_grid(grid: &[Vec<LinearMap>], dims: &[usize]) -> Result<()> {
    let m = dims.len();
    let sampler = GaussianSampler::new(0x11ea2);
    for k in 0..VALIDATION_SAMPLES as u64 {
        let (x, y) = sampler.block_pair(k, dims);
        for i in 0..m {
            for j in 0..m {
                let lhs = dot(&grid[i][j].apply(x.block(j)), y.block(i));
                let rhs = dot(x.block(j), &grid[j][i].apply(y.block(i)));
                let scale = 1.0 + x.norm() * y.norm() * grid[i][j].norm_bound().max(1.0);
                if (lhs - rhs).abs() > VALIDATION_TOL * scale {
                    return Err(Error::Hypothesis(format!(
                        "grid is not symmetric: entry ({j},{i}) is not the adjoint of ({i},{j})"
                    )));
                }
            }
        }
        let bx = grid_rows(grid, dims, &x);
        let q = x.dot(&bx);
        if q < -VALIDATION_TOL * (1.0 + x.norm_squared()) {
            return Err(Error::Hypothesis(format!(
                "grid is not positive: sampled quadratic form {q:.3e} < 0"
            )));
        }
    }
    Ok(())
}

fn grid_rows(grid: &[Vec<LinearMap>], dims: &[usize], x: &BlockVector) -> BlockVector {
    BlockVector::from_blocks_unchecked(grid_forward(grid, dims, x))
}

/// `B_i x = sum_j M_ij x_j` for a symmetric positive grid of linear maps.
///
/// Frobenius mode certifies `beta = 1/sqrt(sum_ij norm_bound(M_ij)^2)`;
/// spectral mode certifies `beta = 1/|||B|||` with `|||B|||` from power
/// iteration on the assembled operator.
pub fn linear_block_coupling(grid: Vec<Vec<LinearMap>>, mode: LinearMode) -> Result<CouplingOperator> {
    let (dims, codims) = grid_shape(&grid)?;
    if dims != codims {
        return Err(Error::Dimension(format!(
            "linear coupling grid must be square with M_ij: H_j -> H_i; columns {dims:?}, rows {codims:?}"
        )));
    }
    if grid.iter().flatten().all(|l| l.norm_bound() == 0.0) {
        return Err(Error::DegenerateCoupling("all grid entries are zero".into()));
    }
    validate_linear_grid(&grid, &dims)?;
    let grid = Arc::new(grid);
    let beta = match mode {
        LinearMode::Frobenius => {
            let s: f64 = grid.iter().flatten().map(|l| l.norm_bound().powi(2)).sum();
            Certificate::new(1.0 / s.sqrt(), Provenance::Frobenius)?
        }
        LinearMode::Spectral => {
            let d = dims.clone();
            let g = grid.clone();
            let apply_flat = move |v: &[f64]| {
                let x = BlockVector::from_flat(&d, v).expect("dims match");
                grid_rows(&g, &d, &x).flatten()
            };
            let total: usize = dims.iter().sum();
            let n = operator_norm(total, &apply_flat, &apply_flat, &PowerIterationOptions::default())?;
            if n == 0.0 {
                return Err(Error::DegenerateCoupling("assembled operator is zero".into()));
            }
            Certificate::new(1.0 / n, Provenance::Spectral)?
        }
    };
    let d = dims.clone();
    CouplingOperator::new(dims, beta, move |x| grid_forward(&grid, &d, x))
}

/// `B_i x = sum_j xi_ij x_j` on `H_i = R^d` for a symmetric positive
/// semidefinite matrix `xi`; `beta = 1/lambda_max(xi)`.
pub fn psd_matrix_coupling(xi: DMatrix<f64>, block_dim: usize) -> Result<CouplingOperator> {
    let m = xi.nrows();
    if m == 0 || xi.ncols() != m {
        return Err(Error::Dimension(format!("coupling matrix must be square, got {:?}", xi.shape())));
    }
    if block_dim == 0 {
        return Err(invalid("block_dim", "must be positive"));
    }
    let scale = xi.amax();
    if scale == 0.0 {
        return Err(Error::DegenerateCoupling("coupling matrix is zero".into()));
    }
    for i in 0..m {
        for j in 0..i {
            if (xi[(i, j)] - xi[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Hypothesis(format!("coupling matrix is not symmetric at ({i},{j})")));
            }
        }
    }
    let sampler = GaussianSampler::new(0x95d);
    for k in 0..VALIDATION_SAMPLES as u64 {
        let v = nalgebra::DVector::from_vec(sampler.vector(&mut sampler.rng(k), m));
        let q = v.dot(&(&xi * &v));
        if q < -VALIDATION_TOL * scale * (1.0 + v.norm_squared()) {
            return Err(Error::Hypothesis(format!(
                "coupling matrix is not positive semidefinite: sampled form {q:.3e}"
            )));
        }
    }
    let lambda_max = matrix_norm(&xi, &PowerIterationOptions::default())?;
    let certificate = Certificate::new(1.0 / lambda_max, Provenance::Eigen)?;
    CouplingOperator::new(vec![block_dim; m], certificate, move |x| {
        (0..m)
            .map(|i| {
                let mut s = vec![0.0; block_dim];
                for j in 0..m {
                    let c = xi[(i, j)];
                    if c != 0.0 {
                        s.iter_mut().zip(x.block(j)).for_each(|(a, b)| *a += c * b);
                    }
                }
                s
            })
            .collect()
    })
}

/// `B_i x = x_i - (1/m) sum_j x_j`, for which cocoercivity holds with
/// equality at `beta = 1`.
pub fn mean_deviation_coupling(m: usize, block_dim: usize) -> Result<CouplingOperator> {
    if m < 2 {
        return Err(invalid("m", "mean deviation needs at least two blocks"));
    }
    if block_dim == 0 {
        return Err(invalid("block_dim", "must be positive"));
    }
    let certificate = Certificate::new(1.0, Provenance::Eigen)?;
    CouplingOperator::new(vec![block_dim; m], certificate, move |x| {
        let mut mean = vec![0.0; block_dim];
        for b in x.blocks() {
            mean.iter_mut().zip(b).for_each(|(a, v)| *a += v);
        }
        mean.iter_mut().for_each(|a| *a /= m as f64);
        x.blocks()
            .iter()
            .map(|b| b.iter().zip(&mean).map(|(v, c)| v - c).collect())
            .collect()
    })
}

/// `B_i x = sum_k L_ki^* (sum_j L_kj x_j)` with
/// `beta = 1/(sum_k sum_i norm_bound(L_ki)^2)`.
pub fn structured_coupling(grid: Vec<Vec<LinearMap>>) -> Result<CouplingOperator> {
    let (dims, codims) = grid_shape(&grid)?;
    let rows = row_norms_sq(&grid)?;
    let certificate = Certificate::new(1.0 / rows.iter().sum::<f64>(), Provenance::Structured)?;
    let d = dims.clone();
    CouplingOperator::new(dims, certificate, move |x| {
        let t = grid_forward(&grid, &codims, x);
        grid_adjoint(&grid, &d, &t)
    })
}

/// A `beta`-cocoercive map on `R^dim`.
#[derive(Clone)]
pub struct CocoerciveMap {
    dim: usize,
    map: Arc<MapFn>,
    beta: f64,
}

impl fmt::Debug for CocoerciveMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CocoerciveMap")
            .field("dim", &self.dim)
            .field("beta", &self.beta)
            .finish()
    }
}

impl CocoerciveMap {
    pub fn new<F>(dim: usize, beta: f64, map: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(invalid("beta", format!("cocoercivity constants must be positive, got {beta}")));
        }
        Ok(Self {
            dim,
            map: Arc::new(map),
            beta,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.map)(x)
    }
}

fn composition(
    maps: Vec<Arc<MapFn>>,
    map_dims: Vec<usize>,
    grid: Vec<Vec<LinearMap>>,
    certify: impl FnOnce(&[f64]) -> Result<Certificate>,
) -> Result<CouplingOperator> {
    let (dims, codims) = grid_shape(&grid)?;
    if maps.len() != grid.len() {
        return Err(Error::Dimension(format!("{} maps for a grid with {} rows", maps.len(), grid.len())));
    }
    if let Some(k) = map_dims.iter().zip(&codims).position(|(a, b)| a != b) {
        return Err(Error::Dimension(format!(
            "map {k} acts on R^{} but grid row {k} lands in R^{}",
            map_dims[k], codims[k]
        )));
    }
    let rows = row_norms_sq(&grid)?;
    let certificate = certify(&rows)?;
    let d = dims.clone();
    CouplingOperator::new(dims, certificate, move |x| {
        let s = grid_forward(&grid, &codims, x);
        let t: Vec<Vec<f64>> = maps.iter().zip(&s).map(|(f, sk)| f(sk)).collect();
        grid_adjoint(&grid, &d, &t)
    })
}

/// `B_i x = sum_k L_ki^* T_k(sum_j L_kj x_j)` with
/// `beta = (1/p) min_k beta_k / sum_i norm_bound(L_ki)^2`.
pub fn cocoercive_composition(maps: Vec<CocoerciveMap>, grid: Vec<Vec<LinearMap>>) -> Result<CouplingOperator> {
    let p = maps.len();
    let betas: Vec<f64> = maps.iter().map(|t| t.beta).collect();
    let map_dims = maps.iter().map(|t| t.dim).collect();
    let fns = maps.into_iter().map(|t| t.map).collect();
    composition(fns, map_dims, grid, |rows| {
        let min = betas
            .iter()
            .zip(rows)
            .map(|(b, s)| b / s)
            .fold(f64::INFINITY, f64::min);
        Certificate::new(min / p as f64, Provenance::Composition)
    })
}

/// `B_i x = sum_k L_ki^* grad phi_k(sum_j L_kj x_j)` with
/// `beta = 1/(p max_k tau_k sum_i norm_bound(L_ki)^2)`.
pub fn gradient_composition(phi: Vec<SmoothFunction>, grid: Vec<Vec<LinearMap>>) -> Result<CouplingOperator> {
    let p = phi.len();
    let taus: Vec<f64> = phi.iter().map(SmoothFunction::lipschitz).collect();
    let map_dims = phi.iter().map(SmoothFunction::dim).collect();
    let fns = phi.iter().map(SmoothFunction::gradient_fn).collect();
    composition(fns, map_dims, grid, |rows| {
        let max = taus.iter().zip(rows).map(|(t, s)| t * s).fold(0.0, f64::max);
        Certificate::new(1.0 / (p as f64 * max), Provenance::Gradient)
    })
}

/// Acts as `first` on the leading coordinates of each block and as `second`
/// on the trailing ones; `beta = min(beta_1, beta_2)`.
pub fn product_coupling(first: CouplingOperator, second: CouplingOperator) -> Result<CouplingOperator> {
    if first.num_blocks() != second.num_blocks() {
        return Err(Error::Dimension(format!(
            "cannot pair couplings with {} and {} blocks",
            first.num_blocks(),
            second.num_blocks()
        )));
    }
    let dims: Vec<usize> = first.dims.iter().zip(&second.dims).map(|(a, b)| a + b).collect();
    let certificate = Certificate::new(first.beta().min(second.beta()), Provenance::Product)?;
    let (d1, d2) = (first.dims.clone(), second.dims.clone());
    CouplingOperator::new(dims, certificate, move |x| {
        let x1 = BlockVector::from_blocks_unchecked(
            x.blocks().iter().zip(&d1).map(|(b, &d)| b[..d].to_vec()).collect(),
        );
        let x2 = BlockVector::from_blocks_unchecked(
            x.blocks().iter().zip(&d1).map(|(b, &d)| b[d..].to_vec()).collect(),
        );
        let y1 = (first.apply)(&x1);
        let y2 = (second.apply)(&x2);
        debug_assert_eq!(y2.len(), d2.len());
        y1.into_iter()
            .zip(y2)
            .map(|(mut a, b)| {
                a.extend(b);
                a
            })
            .collect()
    })
}

/// Worst cocoercivity margin over sampled pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CocoercivityReport {
    pub pairs: usize,
    pub beta: f64,
    /// `min [sum <Bx - By, x - y> - beta sum ||Bx - By||^2]`.
    pub worst_margin: f64,
    /// Largest `|margin|`, small for operators attaining equality.
    pub max_abs_margin: f64,
    /// Largest `max(||x||^2, ||y||^2)` over the sampled pairs.
    pub max_pair_norm_sq: f64,
}

impl CocoercivityReport {
    /// `worst_margin >= -tol (1 + max_pair_norm_sq)`.
    pub fn passes(&self, tol: f64) -> bool {
        self.worst_margin >= -tol * (1.0 + self.max_pair_norm_sq)
    }
}

/// Samples `n_pairs` Gaussian pairs and evaluates the cocoercivity
/// inequality with the certified `beta`.
pub fn certify_cocoercivity(
    b: &CouplingOperator,
    sampler: &GaussianSampler,
    n_pairs: usize,
) -> Result<CocoercivityReport> {
    if n_pairs == 0 {
        return Err(invalid("n_pairs", "must be at least 1"));
    }
    let beta = b.beta();
    let rows = map_global(n_pairs, |k| -> Result<(f64, f64)> {
        let (x, y) = sampler.block_pair(k as u64, &b.dims);
        let d = b.apply(&x)?.sub(&b.apply(&y)?);
        let margin = d.dot(&x.sub(&y)) - beta * d.norm_squared();
        Ok((margin, x.norm_squared().max(y.norm_squared())))
    });
    let mut report = CocoercivityReport {
        pairs: n_pairs,
        beta,
        worst_margin: f64::INFINITY,
        max_abs_margin: 0.0,
        max_pair_norm_sq: 0.0,
    };
    for row in rows {
        let (margin, nsq) = row?;
        report.worst_margin = report.worst_margin.min(margin);
        report.max_abs_margin = report.max_abs_margin.max(margin.abs());
        report.max_pair_norm_sq = report.max_pair_norm_sq.max(nsq);
    }
    Ok(report)
}

/// Largest `||(x - gamma Bx) - (y - gamma By)|| - ||x - y||` over sampled
/// pairs; nonpositive when `Id - gamma B` is nonexpansive.
pub fn forward_step_expansion(
    b: &CouplingOperator,
    gamma: f64,
    sampler: &GaussianSampler,
    n_pairs: usize,
) -> Result<f64> {
    let rows = map_global(n_pairs, |k| -> Result<f64> {
        let (x, y) = sampler.block_pair(k as u64, &b.dims);
        let d = x.sub(&y);
        let db = b.apply(&x)?.sub(&b.apply(&y)?);
        Ok(d.sub(&db.scale(gamma)).norm() - d.norm())
    });
    rows.into_iter().try_fold(f64::NEG_INFINITY, |acc, r| Ok(acc.max(r?)))
}
