//! The parallel forward-backward iteration
//!
//! ```text
//! x_{i,n+1} = l_{i,n} x_{i,n}
//!           + (1 - l_{i,n}) (J_{g_n A_{i,n}}(x_{i,n} - g_n (B_i x_n + b_{i,n})) + a_{i,n})
//! ```
//!
//! `B` is evaluated once per iteration on the frozen iterate `x_n`; the `m`
//! block updates then run independently.

use std::fmt;
use std::sync::Arc;

use crate::block::{dot, norm, sub, BlockVector};
use crate::coupling::{gradient_composition, Certificate, CouplingOperator};
use crate::error::{invalid, Error, Result};
use crate::operator::{check_len, LinearMap, ProxFunction, Resolvent};
use crate::par::Executor;
use crate::prox::SmoothFunction;
use crate::schedule::{SolverConfig, SolverConfigBuilder};
use crate::trace::{IterationRecord, IterationTrace};

type ObjectiveFn = dyn Fn(&BlockVector) -> f64 + Send + Sync;

/// The inclusion system `0 in A_i x_i + B_i x`, `i = 1..m`.
#[derive(Clone)]
pub struct ProblemInstance {
    resolvents: Vec<Resolvent>,
    coupling: CouplingOperator,
    objective: Option<Arc<ObjectiveFn>>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("dims", &self.dims())
            .field("certificate", &self.coupling.certificate())
            .field("has_objective", &self.objective.is_some())
            .finish()
    }
}

impl ProblemInstance {
    pub fn new(resolvents: Vec<Resolvent>, coupling: CouplingOperator) -> Result<Self> {
        let dims: Vec<usize> = resolvents.iter().map(Resolvent::dim).collect();
        if dims != coupling.dims() {
            return Err(Error::Dimension(format!(
                "resolvents act on blocks {dims:?} but the coupling on {:?}",
                coupling.dims()
            )));
        }
        Ok(Self {
            resolvents,
            coupling,
            objective: None,
        })
    }

    /// The variational problem
    /// `minimize sum_i f_i(x_i) + sum_k phi_k(sum_i L_ki x_i)` with the
    /// gradient-composition coupling.
    pub fn variational(f: Vec<ProxFunction>, phi: Vec<SmoothFunction>, grid: Vec<Vec<LinearMap>>) -> Result<Self> {
        if phi.is_empty() {
            return Err(invalid("phi", "at least one smooth term is required"));
        }
        let coupling = gradient_composition(phi.clone(), grid.clone())?;
        let resolvents = f.iter().map(ProxFunction::to_resolvent).collect();
        let problem = Self::new(resolvents, coupling)?;
        if f.iter().all(ProxFunction::has_value) && phi.iter().all(SmoothFunction::has_value) {
            Ok(problem.with_objective(move |x| {
                let separable: f64 = f.iter().enumerate().map(|(i, fi)| fi.value(x.block(i)).unwrap_or(f64::NAN)).sum();
                let smooth: f64 = phi
                    .iter()
                    .zip(&grid)
                    .map(|(p, row)| {
                        let mut s = vec![0.0; p.dim()];
                        for (j, l) in row.iter().enumerate() {
                            s.iter_mut().zip(l.apply(x.block(j))).for_each(|(a, b)| *a += b);
                        }
                        p.value(&s).unwrap_or(f64::NAN)
                    })
                    .sum();
                separable + smooth
            }))
        } else {
            Ok(problem)
        }
    }

    /// Attaches an objective recorded in traces.
    pub fn with_objective<F>(mut self, objective: F) -> Self
    where
        F: Fn(&BlockVector) -> f64 + Send + Sync + 'static,
    {
        self.objective = Some(Arc::new(objective));
        self
    }

    pub fn dims(&self) -> Vec<usize> {
        self.resolvents.iter().map(Resolvent::dim).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.resolvents.len()
    }

    pub fn resolvents(&self) -> &[Resolvent] {
        &self.resolvents
    }

    pub fn coupling(&self) -> &CouplingOperator {
        &self.coupling
    }

    pub fn certificate(&self) -> Certificate {
        self.coupling.certificate()
    }

    pub fn beta(&self) -> f64 {
        self.coupling.beta()
    }

    pub fn objective(&self, x: &BlockVector) -> Option<f64> {
        self.objective.as_ref().map(|f| f(x))
    }

    /// A default configuration for this problem's certificate.
    pub fn config_builder(&self) -> SolverConfigBuilder {
        SolverConfig::builder(self.beta())
    }

    fn check_point(&self, x: &BlockVector) -> Result<()> {
        let dims = self.dims();
        if !x.has_dims(&dims) {
            return Err(Error::Dimension(format!("point has blocks {:?}, problem {dims:?}", x.dims())));
        }
        Ok(())
    }

    fn check_config(&self, config: &SolverConfig) -> Result<()> {
        if config.beta() > self.beta() * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "configuration assumes beta = {} but the coupling is only certified for {}",
                config.beta(),
                self.beta()
            )));
        }
        config.check_dims(&self.dims())
    }
}

/// The iterate `x_n` and its counter `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: BlockVector,
    pub n: usize,
}

impl SolverState {
    pub fn new(x: BlockVector) -> Self {
        Self { x, n: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    /// The residual grew past the divergence factor or became non-finite.
    Diverged,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max_iter",
            Status::Diverged => "diverged",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: BlockVector,
    pub trace: IterationTrace,
    pub status: Status,
    /// Number of executed iterations.
    pub iterations: usize,
    /// Fixed-point residual at `x`.
    pub residual: f64,
}

struct Iterate {
    next: BlockVector,
    residual: f64,
    deltas: Vec<f64>,
}

/// One iteration from `x_n`, evaluating the blocks in `order`. Also returns
/// the exact fixed-point residual at `x_n` for `gamma_n`.
fn iterate(
    problem: &ProblemInstance,
    config: &SolverConfig,
    x: &BlockVector,
    n: usize,
    exec: &Executor,
    order: Option<&[usize]>,
) -> Result<Iterate> {
    let gamma = config.gamma_at(n);
    let bx = problem.coupling.apply(x)?;
    let m = problem.num_blocks();
    let results = exec.map(m, |k| {
        let i = order.map_or(k, |o| o[k]);
        block_update(problem, config, x, &bx, gamma, n, i).map(|r| (i, r))
    });
    let mut slots: Vec<Option<(Vec<f64>, f64, f64)>> = vec![None; m];
    for r in results {
        let (i, r) = r?;
        slots[i] = Some(r);
    }
    let mut blocks = Vec::with_capacity(m);
    let mut res_sq = 0.0;
    let mut deltas = Vec::with_capacity(m);
    for slot in slots {
        let (b, r, d) = slot.expect("every block is updated once");
        blocks.push(b);
        res_sq += r;
        deltas.push(d);
    }
    Ok(Iterate {
        next: BlockVector::from_blocks_unchecked(blocks),
        residual: res_sq.sqrt(),
        deltas,
    })
}

/// Returns `(x_{i,n+1}, ||x_i - J_{gamma A_i}(x_i - gamma B_i x)||^2, ||x_{i,n+1} - x_{i,n}||)`.
fn block_update(
    problem: &ProblemInstance,
    config: &SolverConfig,
    x: &BlockVector,
    bx: &BlockVector,
    gamma: f64,
    n: usize,
    i: usize,
) -> Result<(Vec<f64>, f64, f64)> {
    let xi = x.block(i);
    let bi = bx.block(i);
    let a = &problem.resolvents[i];
    let d = xi.len();
    let finite = xi.iter().chain(bi).all(|v| v.is_finite());

    let forward: Vec<f64> = xi.iter().zip(bi).map(|(v, b)| v - gamma * b).collect();
    let exact = a.apply(gamma, &forward);
    if finite || exact.len() != d {
        check_len(i, &exact, d)?;
    }
    let diff = sub(xi, &exact);
    let res_sq = dot(&diff, &diff);

    let schedule = config.approximation(i);
    let coupling_error = config.coupling_errors().filter(|e| !e.is_zero_at(n));
    let mut y = if schedule.is_exact_at(n) && coupling_error.is_none() {
        exact
    } else {
        let mut shifted = forward;
        if let Some(e) = coupling_error {
            shifted.iter_mut().zip(e.at(i, n)).for_each(|(v, b)| *v -= gamma * b);
        }
        let y = schedule.resolvent(a, gamma, n, &shifted);
        if finite || y.len() != d {
            check_len(i, &y, d)?;
        }
        y
    };
    if let Some(e) = config.primal_errors().filter(|e| !e.is_zero_at(n)) {
        y.iter_mut().zip(e.at(i, n)).for_each(|(v, a)| *v += a);
    }
    let lambda = config.block_lambda_at(i, n);
    let next: Vec<f64> = if lambda == 0.0 {
        y
    } else {
        xi.iter().zip(&y).map(|(v, w)| lambda * v + (1.0 - lambda) * w).collect()
    };
    let delta = norm(&sub(&next, xi));
    Ok((next, res_sq, delta))
}

/// One iteration `x_n -> x_{n+1}`.
pub fn step(problem: &ProblemInstance, config: &SolverConfig, state: &SolverState) -> Result<SolverState> {
    problem.check_config(config)?;
    problem.check_point(&state.x)?;
    let exec = Executor::new(config.workers());
    let it = iterate(problem, config, &state.x, state.n, &exec, None)?;
    Ok(SolverState {
        x: it.next,
        n: state.n + 1,
    })
}

/// Same as [`step`] with the blocks evaluated in the given order.
#[doc(hidden)]
pub fn step_in_order(
    problem: &ProblemInstance,
    config: &SolverConfig,
    state: &SolverState,
    order: &[usize],
) -> Result<SolverState> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..problem.num_blocks()).collect::<Vec<_>>() {
        return Err(invalid("order", "must be a permutation of the blocks"));
    }
    let it = iterate(problem, config, &state.x, state.n, &Executor::sequential(), Some(order))?;
    Ok(SolverState {
        x: it.next,
        n: state.n + 1,
    })
}

/// `|||(x_i - J_{gamma A_i}(x_i - gamma B_i x))_i|||`, always with the exact
/// operators `A_i`.
pub fn fixed_point_residual(problem: &ProblemInstance, x: &BlockVector, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    problem.check_point(x)?;
    let bx = problem.coupling.apply(x)?;
    let mut sum = 0.0;
    for (i, a) in problem.resolvents.iter().enumerate() {
        let xi = x.block(i);
        let forward: Vec<f64> = xi.iter().zip(bx.block(i)).map(|(v, b)| v - gamma * b).collect();
        let j = a.apply(gamma, &forward);
        if j.len() != xi.len() {
            check_len(i, &j, xi.len())?;
        }
        let d = sub(xi, &j);
        sum += dot(&d, &d);
    }
    Ok(sum.sqrt())
}

/// Iterates from `x0` until the fixed-point residual drops to the tolerance,
/// the iteration budget runs out, or the residual blows up.
///
/// The output is bitwise independent of `config.workers()`.
pub fn solve(problem: &ProblemInstance, config: &SolverConfig, x0: BlockVector) -> Result<Solution> {
    problem.check_config(config)?;
    problem.check_point(&x0)?;
    let exec = Executor::new(config.workers());
    let mut trace = IterationTrace::new(problem.num_blocks());
    let mut x = x0;
    let mut initial: Option<f64> = None;
    for n in 0..config.max_iterations() {
        let it = iterate(problem, config, &x, n, &exec, None)?;
        let r0 = *initial.get_or_insert(it.residual);
        if it.residual <= config.tolerance() {
            return Ok(Solution {
                x,
                trace,
                status: Status::Converged,
                iterations: n,
                residual: it.residual,
            });
        }
        if !it.residual.is_finite() || it.residual > config.divergence_factor() * r0 {
            return Ok(Solution {
                x,
                trace,
                status: Status::Diverged,
                iterations: n,
                residual: it.residual,
            });
        }
        trace.push(IterationRecord {
            iter: n,
            gamma: config.gamma_at(n),
            lambda: config.lambda_at(n),
            residual: it.residual,
            block_deltas: it.deltas,
            objective: problem.objective(&x),
        });
        x = it.next;
    }
    let n = config.max_iterations();
    let residual = fixed_point_residual(problem, &x, config.gamma_at(n))?;
    let status = if residual <= config.tolerance() {
        Status::Converged
    } else if !residual.is_finite() {
        Status::Diverged
    } else {
        Status::MaxIterations
    };
    Ok(Solution {
        x,
        trace,
        status,
        iterations: n,
        residual,
    })
}

/// Builds the variational problem, derives the configuration from its
/// certificate through `configure`, and solves.
pub fn variational_solve<F>(
    f: Vec<ProxFunction>,
    phi: Vec<SmoothFunction>,
    grid: Vec<Vec<LinearMap>>,
    x0: BlockVector,
    configure: F,
) -> Result<Solution>
where
    F: FnOnce(SolverConfigBuilder) -> SolverConfigBuilder,
{
    let problem = ProblemInstance::variational(f, phi, grid)?;
    let config = configure(problem.config_builder()).build()?;
    solve(&problem, &config, x0)
}
