//! Resolvent identities for approximate operators.
//!
//! An iteration may replace `A_i` by `A_{i,n}` as long as the replacement
//! converges fast enough. Two families have closed-form resolvents: rescaled
//! operators `(gamma_{i,n}/gamma_n) A_i` and Yosida approximations.

use crate::block::{norm, sub};
use crate::error::{invalid, Result};
use crate::operator::Resolvent;
use crate::schedule::Sequence;

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(invalid("mu", format!("Yosida index must be positive, got {mu}")));
    }
    Ok(())
}

/// Yosida approximation of `A` of index `mu`: `(x - J_{mu A} x) / mu`.
pub fn yosida_apply(a: &Resolvent, mu: f64, x: &[f64]) -> Result<Vec<f64>> {
    check_mu(mu)?;
    Ok(sub(x, &a.apply(mu, x)).into_iter().map(|v| v / mu).collect())
}

/// `J_{gamma (moyo A mu)} x = x + gamma (J_{(gamma + mu) A} x - x) / (gamma + mu)`.
pub fn yosida_resolvent_at(a: &Resolvent, mu: f64, gamma: f64, x: &[f64]) -> Vec<f64> {
    let j = a.apply(gamma + mu, x);
    let t = gamma / (gamma + mu);
    x.iter().zip(j).map(|(v, w)| v + t * (w - v)).collect()
}

/// The resolvent family of the Yosida approximation of `A` of index `mu`.
pub fn yosida_resolvent(a: &Resolvent, mu: f64) -> Result<Resolvent> {
    check_mu(mu)?;
    let a = a.clone();
    Resolvent::new(a.dim(), move |gamma, x| yosida_resolvent_at(&a, mu, gamma, x))
}

/// `||J_{mu A} x - J_{gamma A}(x + (1 - gamma/mu)(J_{mu A} x - x))||`.
///
/// Vanishes for every resolvent family of a single monotone operator, so a
/// positive value flags a `gamma`-parameterised oracle that is inconsistent
/// across indices.
pub fn rescale_resolvent_identity_check(a: &Resolvent, gamma: f64, mu: f64, x: &[f64]) -> f64 {
    let jmu = a.apply(mu, x);
    let c = 1.0 - gamma / mu;
    let shifted: Vec<f64> = x.iter().zip(&jmu).map(|(v, j)| v + c * (j - v)).collect();
    norm(&sub(&jmu, &a.apply(gamma, &shifted)))
}

/// How block `i` realises `A_{i,n}` at iteration `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum ApproximationSchedule {
    /// `A_{i,n} = A_i`.
    Exact,
    /// `A_{i,n} = (gamma_{i,n}/gamma_n) A_i`, so the step uses
    /// `J_{gamma_{i,n} A_i}`. `budget` bounds `sum_n |gamma_{i,n} - gamma_n|`.
    ScaledIndex { indices: Sequence, budget: Option<f64> },
    /// `A_{i,n}` is the Yosida approximation of index `mu_{i,n}`; an index of
    /// zero stands for `A_i` itself. `budget` bounds `sum_n mu_{i,n}`.
    Yosida { indices: Sequence, budget: Option<f64> },
}

impl ApproximationSchedule {
    pub fn is_exact_at(&self, n: usize) -> bool {
        match self {
            ApproximationSchedule::Exact => true,
            ApproximationSchedule::ScaledIndex { .. } => false,
            ApproximationSchedule::Yosida { indices, .. } => indices.at(n) == 0.0,
        }
    }

    /// `J_{gamma A_{i,n}} x`.
    pub fn resolvent(&self, a: &Resolvent, gamma: f64, n: usize, x: &[f64]) -> Vec<f64> {
        match self {
            ApproximationSchedule::Exact => a.apply(gamma, x),
            ApproximationSchedule::ScaledIndex { indices, .. } => a.apply(indices.at(n), x),
            ApproximationSchedule::Yosida { indices, .. } => {
                let mu = indices.at(n);
                if mu == 0.0 {
                    a.apply(gamma, x)
                } else {
                    yosida_resolvent_at(a, mu, gamma, x)
                }
            }
        }
    }

    /// Partial sum audited against the declared budget over `horizon`
    /// iterations.
    pub fn partial_sum(&self, gamma: &Sequence, horizon: usize) -> f64 {
        match self {
            ApproximationSchedule::Exact => 0.0,
            ApproximationSchedule::ScaledIndex { indices, .. } => {
                (0..horizon).map(|n| (indices.at(n) - gamma.at(n)).abs()).sum()
            }
            ApproximationSchedule::Yosida { indices, .. } => (0..horizon).map(|n| indices.at(n)).sum(),
        }
    }

    pub(crate) fn validate(&self, block: usize, beta: f64, gamma: &Sequence, horizon: usize) -> Result<()> {
        let budget = match self {
            ApproximationSchedule::Exact => return Ok(()),
            ApproximationSchedule::ScaledIndex { indices, budget } => {
                let (lo, hi) = indices.range(horizon);
                if !(lo > 0.0) || !(hi < 2.0 * beta) {
                    return Err(invalid(
                        "approximation",
                        format!("block {block}: scaled indices span [{lo}, {hi}], outside ]0, 2 beta[ = ]0, {}[", 2.0 * beta),
                    ));
                }
                budget
            }
            ApproximationSchedule::Yosida { indices, budget } => {
                let (lo, hi) = indices.range(horizon);
                if !(lo >= 0.0) || !hi.is_finite() {
                    return Err(invalid(
                        "approximation",
                        format!("block {block}: Yosida indices span [{lo}, {hi}], must be finite and nonnegative"),
                    ));
                }
                budget
            }
        };
        if let Some(b) = budget {
            let s = self.partial_sum(gamma, horizon);
            if s > *b {
                return Err(invalid(
                    "approximation",
                    format!("block {block}: partial sum {s} over {horizon} iterations exceeds the declared budget {b}"),
                ));
            }
        }
        Ok(())
    }
}
