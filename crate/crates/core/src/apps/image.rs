//! Image decomposition: `minimize sum_i f_i(x_i) + 1/4 ||z - sum_i x_i||^2`.

use super::scaled_id;
use crate::error::{invalid, Error, Result};
use crate::operator::ProxFunction;
use crate::prox::SmoothFunction;
use crate::solver::ProblemInstance;

/// One smooth term `||. - z||^2 / 4` (Lipschitz constant `1/2`) with
/// identity maps, so `beta = 2/m`.
pub fn build_image_decomposition(z: Vec<f64>, f: Vec<ProxFunction>) -> Result<ProblemInstance> {
    if f.is_empty() {
        return Err(invalid("f", "need at least one component"));
    }
    let d = z.len();
    if let Some(i) = f.iter().position(|fi| fi.dim() != d) {
        return Err(Error::Dimension(format!("f_{i} acts on R^{}, observation has {d} entries", f[i].dim())));
    }
    let phi = SmoothFunction::scaled_sq_distance_to(z, 0.25)?;
    let row = (0..f.len()).map(|_| scaled_id(d, 1.0)).collect::<Result<Vec<_>>>()?;
    ProblemInstance::variational(f, vec![phi], vec![row])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockVector;
    use crate::solver::{solve, Status};

    #[test]
    fn certificate_is_two_over_m() {
        let f = |m| (0..m).map(|_| ProxFunction::zero(4).unwrap()).collect();
        assert_eq!(build_image_decomposition(vec![0.0; 4], f(3)).unwrap().beta(), 2.0 / 3.0);
        assert_eq!(build_image_decomposition(vec![0.0; 4], f(2)).unwrap().beta(), 1.0);
        assert!(build_image_decomposition(vec![0.0; 3], f(2)).is_err());
    }

    #[test]
    fn quadratic_components_vanish() {
        let f = (0..3).map(|_| ProxFunction::scaled_sq_norm(4, 1.0).unwrap()).collect();
        let p = build_image_decomposition(vec![0.0; 4], f).unwrap();
        let cfg = p.config_builder().tolerance(1e-10).build().unwrap();
        let x0 = BlockVector::new(vec![vec![1.0, -2.0, 0.5, 3.0], vec![0.0; 4], vec![-1.0; 4]]).unwrap();
        let sol = solve(&p, &cfg, x0).unwrap();
        assert_eq!(sol.status, Status::Converged);
        assert!(sol.residual <= 1e-10);
        assert!(sol.x.norm() <= 1e-9);
    }

    #[test]
    fn free_components_split_the_observation() {
        let z = vec![1.0, 2.0, -3.0, 0.5];
        let f = (0..3).map(|_| ProxFunction::zero(4).unwrap()).collect();
        let p = build_image_decomposition(z.clone(), f).unwrap();
        let cfg = p.config_builder().tolerance(1e-10).build().unwrap();
        let x0 = BlockVector::new(vec![vec![0.3; 4], vec![-2.0, 0.0, 1.0, 1.0], vec![0.0; 4]]).unwrap();
        let sol = solve(&p, &cfg, x0).unwrap();
        assert_eq!(sol.status, Status::Converged);
        for l in 0..4 {
            let s: f64 = (0..3).map(|i| sol.x.block(i)[l]).sum();
            assert!((s - z[l]).abs() <= 1e-8);
        }
    }
}
