//! Parameter sequences and the validated solver configuration.
//!
//! Infinite sequences are audited only over the iterations a run can
//! execute (`max_iterations`); asymptotic summability is the caller's claim.

use crate::approx::ApproximationSchedule;
use crate::block::norm;
use crate::error::{invalid, Error, Result};

/// A real sequence indexed by the iteration counter `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Sequence {
    Constant(f64),
    /// `values[n]` while `n < values.len()`, then `tail`.
    Values { values: Vec<f64>, tail: f64 },
    /// `base + scale / (n + 1)^power`.
    Decay { base: f64, scale: f64, power: f64 },
}

impl Sequence {
    /// `scale / (n + 1)^power`.
    pub fn decay(scale: f64, power: f64) -> Self {
        Sequence::Decay {
            base: 0.0,
            scale,
            power,
        }
    }

    pub fn at(&self, n: usize) -> f64 {
        match self {
            Sequence::Constant(c) => *c,
            Sequence::Values { values, tail } => values.get(n).copied().unwrap_or(*tail),
            Sequence::Decay { base, scale, power } => base + scale / ((n + 1) as f64).powf(*power),
        }
    }

    /// `(min, max)` over `n < horizon` (`horizon >= 1`). NaN entries make
    /// both bounds NaN.
    pub fn range(&self, horizon: usize) -> (f64, f64) {
        let horizon = horizon.max(1);
        match self {
            Sequence::Constant(c) => (*c, *c),
            Sequence::Decay { power, .. } if *power >= 0.0 => {
                let (a, b) = (self.at(0), self.at(horizon - 1));
                if a.is_nan() || b.is_nan() {
                    (f64::NAN, f64::NAN)
                } else {
                    (a.min(b), a.max(b))
                }
            }
            _ => (0..horizon).map(|n| self.at(n)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                if v.is_nan() || lo.is_nan() {
                    (f64::NAN, f64::NAN)
                } else {
                    (lo.min(v), hi.max(v))
                }
            }),
        }
    }

    /// `sum_{n < horizon} |s_n|`.
    pub fn abs_sum(&self, horizon: usize) -> f64 {
        match self {
            Sequence::Constant(c) => c.abs() * horizon as f64,
            _ => (0..horizon).map(|n| self.at(n).abs()).sum(),
        }
    }

    pub fn is_identically_zero(&self, horizon: usize) -> bool {
        self.range(horizon) == (0.0, 0.0)
    }
}

/// Errors `e_{i,n} = magnitude_n * direction_i` added in block `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSchedule {
    magnitude: Sequence,
    directions: Vec<Vec<f64>>,
    budget: Option<f64>,
}

impl ErrorSchedule {
    /// `budget`, when given, bounds `sum_n ||e_{i,n}||` for every block.
    pub fn new(magnitude: Sequence, directions: Vec<Vec<f64>>, budget: Option<f64>) -> Result<Self> {
        if directions.is_empty() {
            return Err(invalid("directions", "need one direction per block"));
        }
        if directions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("directions", "must be finite"));
        }
        Ok(Self {
            magnitude,
            directions,
            budget,
        })
    }

    pub fn magnitude(&self) -> &Sequence {
        &self.magnitude
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    pub fn at(&self, block: usize, n: usize) -> Vec<f64> {
        let c = self.magnitude.at(n);
        self.directions[block].iter().map(|v| c * v).collect()
    }

    pub fn is_zero_at(&self, n: usize) -> bool {
        self.magnitude.at(n) == 0.0
    }

    /// Largest per-block partial sum `sum_{n < horizon} ||e_{i,n}||`.
    pub fn partial_sum(&self, horizon: usize) -> f64 {
        let mags = self.magnitude.abs_sum(horizon);
        self.directions.iter().map(|d| mags * norm(d)).fold(0.0, f64::max)
    }

    fn validate(&self, name: &'static str, horizon: usize) -> Result<()> {
        let (lo, hi) = self.magnitude.range(horizon);
        if !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(name, "magnitudes must be finite"));
        }
        if let Some(b) = self.budget {
            let s = self.partial_sum(horizon);
            if s > b {
                return Err(invalid(
                    name,
                    format!("partial sum {s} over {horizon} iterations exceeds the declared budget {b}"),
                ));
            }
        }
        Ok(())
    }
}

/// Per-block relaxations `lambda_{i,n} = lambda_n + deviation_i(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRelaxation {
    deviations: Vec<Sequence>,
    budget: Option<f64>,
}

impl BlockRelaxation {
    /// `budget`, when given, bounds `sum_n |lambda_{i,n} - lambda_n|` for every
    /// block.
    pub fn new(deviations: Vec<Sequence>, budget: Option<f64>) -> Self {
        Self { deviations, budget }
    }

    pub fn deviations(&self) -> &[Sequence] {
        &self.deviations
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }
}

/// A validated parameter set for the forward-backward iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    beta: f64,
    epsilon: f64,
    gamma: Sequence,
    lambda: Sequence,
    block_relaxation: Option<BlockRelaxation>,
    primal_errors: Option<ErrorSchedule>,
    coupling_errors: Option<ErrorSchedule>,
    approximations: Vec<ApproximationSchedule>,
    max_iterations: usize,
    tolerance: f64,
    divergence_factor: f64,
    workers: usize,
}

impl SolverConfig {
    /// Starts from the defaults for a coupling with constant `beta`:
    /// `gamma_n = beta`, `lambda_n = 0`, `epsilon = min(1, beta)/100`, exact
    /// operators, no errors, tolerance `1e-8`, at most `1e5` iterations.
    pub fn builder(beta: f64) -> SolverConfigBuilder {
        SolverConfigBuilder {
            beta,
            epsilon: None,
            gamma: None,
            lambda: Sequence::Constant(0.0),
            block_relaxation: None,
            primal_errors: None,
            coupling_errors: None,
            approximations: Vec::new(),
            max_iterations: 100_000,
            tolerance: 1e-8,
            divergence_factor: 1e6,
            workers: 1,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> &Sequence {
        &self.gamma
    }

    pub fn lambda(&self) -> &Sequence {
        &self.lambda
    }

    pub fn gamma_at(&self, n: usize) -> f64 {
        self.gamma.at(n)
    }

    pub fn lambda_at(&self, n: usize) -> f64 {
        self.lambda.at(n)
    }

    /// `lambda_{i,n}`.
    pub fn block_lambda_at(&self, block: usize, n: usize) -> f64 {
        let base = self.lambda.at(n);
        match &self.block_relaxation {
            Some(r) => base + r.deviations[block].at(n),
            None => base,
        }
    }

    pub fn block_relaxation(&self) -> Option<&BlockRelaxation> {
        self.block_relaxation.as_ref()
    }

    /// `a_{i,n}`, added after the resolvent.
    pub fn primal_errors(&self) -> Option<&ErrorSchedule> {
        self.primal_errors.as_ref()
    }

    /// `b_{i,n}`, added to the coupling output.
    pub fn coupling_errors(&self) -> Option<&ErrorSchedule> {
        self.coupling_errors.as_ref()
    }

    pub fn approximations(&self) -> &[ApproximationSchedule] {
        &self.approximations
    }

    pub fn approximation(&self, block: usize) -> &ApproximationSchedule {
        self.approximations
            .get(block)
            .unwrap_or(&ApproximationSchedule::Exact)
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn divergence_factor(&self) -> f64 {
        self.divergence_factor
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Checks the block-count dependent parts against a problem's shape.
    pub(crate) fn check_dims(&self, dims: &[usize]) -> Result<()> {
        let m = dims.len();
        if !self.approximations.is_empty() && self.approximations.len() != m {
            return Err(Error::Config(format!(
                "{} approximation schedules for {m} blocks",
                self.approximations.len()
            )));
        }
        if let Some(r) = &self.block_relaxation {
            if r.deviations.len() != m {
                return Err(Error::Config(format!(
                    "{} relaxation deviations for {m} blocks",
                    r.deviations.len()
                )));
            }
        }
        for (name, e) in [("primal_errors", &self.primal_errors), ("coupling_errors", &self.coupling_errors)] {
            if let Some(e) = e {
                let got: Vec<usize> = e.directions.iter().map(Vec::len).collect();
                if got != dims {
                    return Err(Error::Config(format!(
                        "{name}: direction sizes {got:?} do not match blocks {dims:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// A builder seeded with this configuration.
    pub fn to_builder(&self) -> SolverConfigBuilder {
        SolverConfigBuilder {
            beta: self.beta,
            epsilon: Some(self.epsilon),
            gamma: Some(self.gamma.clone()),
            lambda: self.lambda.clone(),
            block_relaxation: self.block_relaxation.clone(),
            primal_errors: self.primal_errors.clone(),
            coupling_errors: self.coupling_errors.clone(),
            approximations: self.approximations.clone(),
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            divergence_factor: self.divergence_factor,
            workers: self.workers,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfigBuilder {
    beta: f64,
    epsilon: Option<f64>,
    gamma: Option<Sequence>,
    lambda: Sequence,
    block_relaxation: Option<BlockRelaxation>,
    primal_errors: Option<ErrorSchedule>,
    coupling_errors: Option<ErrorSchedule>,
    approximations: Vec<ApproximationSchedule>,
    max_iterations: usize,
    tolerance: f64,
    divergence_factor: f64,
    workers: usize,
}

impl SolverConfigBuilder {
    pub fn epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn gamma(mut self, gamma: Sequence) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn constant_gamma(self, gamma: f64) -> Self {
        self.gamma(Sequence::Constant(gamma))
    }

    pub fn lambda(mut self, lambda: Sequence) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn constant_lambda(self, lambda: f64) -> Self {
        self.lambda(Sequence::Constant(lambda))
    }

    pub fn block_relaxation(mut self, relaxation: BlockRelaxation) -> Self {
        self.block_relaxation = Some(relaxation);
        self
    }

    pub fn primal_errors(mut self, errors: ErrorSchedule) -> Self {
        self.primal_errors = Some(errors);
        self
    }

    pub fn coupling_errors(mut self, errors: ErrorSchedule) -> Self {
        self.coupling_errors = Some(errors);
        self
    }

    pub fn approximations(mut self, schedules: Vec<ApproximationSchedule>) -> Self {
        self.approximations = schedules;
        self
    }

    pub fn max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn divergence_factor(mut self, factor: f64) -> Self {
        self.divergence_factor = factor;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn build(self) -> Result<SolverConfig> {
        let beta = self.beta;
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(invalid("beta", format!("must be finite and positive, got {beta}")));
        }
        let epsilon = self.epsilon.unwrap_or(beta.min(1.0) / 100.0);
        if !(epsilon > 0.0 && epsilon < beta.min(1.0)) {
            return Err(invalid(
                "epsilon",
                format!("{epsilon} is outside ]0, min(1, beta)[ = ]0, {}[", beta.min(1.0)),
            ));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations", "must be at least 1"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(invalid("tolerance", "must be nonnegative"));
        }
        if !(self.divergence_factor > 1.0) {
            return Err(invalid("divergence_factor", "must exceed 1"));
        }
        if self.workers == 0 {
            return Err(invalid("workers", "must be at least 1"));
        }
        let horizon = self.max_iterations;
        let gamma = self.gamma.unwrap_or(Sequence::Constant(beta));
        let (glo, ghi) = gamma.range(horizon);
        let (gmin, gmax) = (epsilon, 2.0 * beta - epsilon);
        if !(glo >= gmin && ghi <= gmax) {
            return Err(invalid(
                "gamma",
                format!(
                    "step sizes span [{glo}, {ghi}] but must lie in [epsilon, 2*beta - epsilon] = [{gmin}, {gmax}]"
                ),
            ));
        }
        let (llo, lhi) = self.lambda.range(horizon);
        if !(llo >= 0.0 && lhi <= 1.0 - epsilon) {
            return Err(invalid(
                "lambda",
                format!(
                    "relaxations span [{llo}, {lhi}] but must lie in [0, 1 - epsilon] = [0, {}]",
                    1.0 - epsilon
                ),
            ));
        }
        if let Some(r) = &self.block_relaxation {
            for (i, d) in r.deviations.iter().enumerate() {
                for n in 0..horizon {
                    let l = self.lambda.at(n) + d.at(n);
                    if !(0.0..1.0).contains(&l) {
                        return Err(invalid(
                            "block_relaxation",
                            format!("lambda_{{{i},{n}}} = {l} is outside [0, 1["),
                        ));
                    }
                    if matches!(d, Sequence::Constant(_)) && matches!(self.lambda, Sequence::Constant(_)) {
                        break;
                    }
                }
                if let Some(b) = r.budget {
                    let s = d.abs_sum(horizon);
                    if s > b {
                        return Err(invalid(
                            "block_relaxation",
                            format!("block {i}: deviation sum {s} exceeds the declared budget {b}"),
                        ));
                    }
                }
            }
        }
        if let Some(e) = &self.primal_errors {
            e.validate("primal_errors", horizon)?;
        }
        if let Some(e) = &self.coupling_errors {
            e.validate("coupling_errors", horizon)?;
        }
        for (i, a) in self.approximations.iter().enumerate() {
            a.validate(i, beta, &gamma, horizon)?;
        }
        Ok(SolverConfig {
            beta,
            epsilon,
            gamma,
            lambda: self.lambda,
            block_relaxation: self.block_relaxation,
            primal_errors: self.primal_errors,
            coupling_errors: self.coupling_errors,
            approximations: self.approximations,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            divergence_factor: self.divergence_factor,
            workers: self.workers,
        })
    }
}
