//! Weighted best approximation:
//! `minimize 1/2 sum_{k>=2} w_k ||x_1 - x_k||^2` over `x_i in C_i`.

use super::scaled_id;
use crate::error::{invalid, Error, Result};
use crate::operator::{LinearMap, ProxFunction};
use crate::prox::{ConvexSet, SmoothFunction};
use crate::solver::ProblemInstance;

/// Requires `m >= 2` sets of equal dimension and weights `w_2, ..., w_m`
/// in `]0, 1]` with largest weight exactly `1`. The certificate is
/// `beta = 1/(2(m-1))`.
pub fn build_best_approximation(sets: Vec<ConvexSet>, weights: Vec<f64>) -> Result<ProblemInstance> {
    let m = sets.len();
    if m < 2 {
        return Err(invalid("sets", "need at least two sets"));
    }
    if weights.len() != m - 1 {
        return Err(Error::Dimension(format!("{} weights for {m} sets, expected {}", weights.len(), m - 1)));
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(invalid("weights", "must be positive"));
    }
    let max = weights.iter().copied().fold(0.0, f64::max);
    if max != 1.0 {
        return Err(invalid("weights", format!("largest weight must equal 1, got {max}")));
    }
    let d = sets[0].dim();
    if let Some(i) = sets.iter().position(|s| s.dim() != d) {
        return Err(Error::Dimension(format!("set {i} lives in R^{}, set 0 in R^{d}", sets[i].dim())));
    }
    let phi = weights
        .iter()
        .map(|&w| SmoothFunction::scaled_half_sq_norm(d, w))
        .collect::<Result<Vec<_>>>()?;
    let grid = (0..m - 1)
        .map(|k| {
            (0..m)
                .map(|i| match i {
                    0 => scaled_id(d, 1.0),
                    _ if i == k + 1 => scaled_id(d, -1.0),
                    _ => scaled_id(d, 0.0),
                })
                .collect::<Result<Vec<LinearMap>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let f = sets.into_iter().map(ProxFunction::indicator).collect();
    ProblemInstance::variational(f, phi, grid)
}
