//! Two agents coupled through a smooth penalty:
//! `minimize f_1(x_1) + f_2(x_2) + phi(L_11 x_1 + L_12 x_2)`.

use crate::error::{Error, Result};
use crate::operator::{LinearMap, ProxFunction};
use crate::prox::{ConvexSet, SmoothFunction};
use crate::solver::ProblemInstance;

/// The penalty `phi`; each choice has a `1`-Lipschitz gradient.
#[derive(Debug, Clone)]
pub enum TwoAgentCoupling {
    /// `1/2 ||.||^2`.
    Quadratic,
    /// `1/2 d_C^2`.
    Distance(ConvexSet),
    /// The Moreau envelope of `psi`.
    Envelope(ProxFunction),
}

impl TwoAgentCoupling {
    pub(crate) fn smooth(&self, dim: usize) -> Result<SmoothFunction> {
        let got = match self {
            TwoAgentCoupling::Quadratic => return SmoothFunction::scaled_half_sq_norm(dim, 1.0),
            TwoAgentCoupling::Distance(c) => c.dim(),
            TwoAgentCoupling::Envelope(psi) => psi.dim(),
        };
        if got != dim {
            return Err(Error::Dimension(format!("penalty acts on R^{got}, maps land in R^{dim}")));
        }
        match self {
            TwoAgentCoupling::Quadratic => unreachable!(),
            TwoAgentCoupling::Distance(c) => SmoothFunction::half_sq_distance_to_set(c.clone()),
            TwoAgentCoupling::Envelope(psi) => SmoothFunction::moreau_envelope(psi.clone()),
        }
    }

    /// `prox_psi(s) - s` for the underlying `psi`.
    pub(crate) fn pull(&self, s: &[f64]) -> Vec<f64> {
        match self {
            TwoAgentCoupling::Quadratic => s.iter().map(|v| -v).collect(),
            TwoAgentCoupling::Distance(c) => c.project(s).iter().zip(s).map(|(p, v)| p - v).collect(),
            TwoAgentCoupling::Envelope(psi) => psi.prox(1.0, s).iter().zip(s).map(|(p, v)| p - v).collect(),
        }
    }
}

/// `beta = 1/(||L_11||^2 + ||L_12||^2)` from the maps' norm bounds.
pub fn build_two_agent(
    f1: ProxFunction,
    f2: ProxFunction,
    l11: LinearMap,
    l12: LinearMap,
    coupling: TwoAgentCoupling,
) -> Result<ProblemInstance> {
    if l11.codomain() != l12.codomain() {
        return Err(Error::Dimension(format!(
            "L_11 lands in R^{} but L_12 in R^{}",
            l11.codomain(),
            l12.codomain()
        )));
    }
    let phi = coupling.smooth(l11.codomain())?;
    ProblemInstance::variational(vec![f1, f2], vec![phi], vec![vec![l11, l12]])
}
