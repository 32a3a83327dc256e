//! Source separation with quadratic data terms:
//! `minimize sum_i f_i(x_i) + sum_k ||sum_i L_ki x_i - z_k||^2`.

use crate::error::{Error, Result};
use crate::operator::{LinearMap, ProxFunction};
use crate::prox::SmoothFunction;
use crate::solver::ProblemInstance;

/// Every data term `||. - z_k||^2` has a `2`-Lipschitz gradient.
pub fn build_source_separation(
    f: Vec<ProxFunction>,
    grid: Vec<Vec<LinearMap>>,
    observations: Vec<Vec<f64>>,
) -> Result<ProblemInstance> {
    if observations.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "{} observations for {} grid rows",
            observations.len(),
            grid.len()
        )));
    }
    let phi = observations
        .into_iter()
        .map(|z| SmoothFunction::scaled_sq_distance_to(z, 1.0))
        .collect::<Result<Vec<_>>>()?;
    ProblemInstance::variational(f, phi, grid)
}
