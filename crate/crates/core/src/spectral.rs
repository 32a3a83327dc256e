//! Operator-norm estimation by power iteration on `L^* L`.

use crate::block::{dot, norm};
use crate::error::{Error, Result};
use crate::sampling::GaussianSampler;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationOptions {
    /// Relative change of the Rayleigh quotient at which iteration stops.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for PowerIterationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 10_000,
            seed: 0x5eed,
        }
    }
}

/// Estimates `||L||` for `L: R^dim -> R^k` given its forward and adjoint
/// oracles.
///
/// Iterates `v <- L^*L v / ||L^*L v||` from a seeded Gaussian start and stops
/// once the Rayleigh quotient `||L v||^2` changes by at most `tol` relative.
/// The returned value is `sqrt` of that quotient, so it approaches the norm
/// from below. A zero operator returns `0`.
pub fn operator_norm<F, G>(
    dim: usize,
    forward: F,
    adjoint: G,
    opts: &PowerIterationOptions,
) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
    G: Fn(&[f64]) -> Vec<f64>,
{
    if dim == 0 {
        return Err(Error::Dimension("operator on a zero-dimensional space".into()));
    }
    let sampler = GaussianSampler::new(opts.seed);
    let mut v = sampler.vector(&mut sampler.rng(0), dim);
    let n0 = norm(&v);
    v.iter_mut().for_each(|c| *c /= n0);

    let mut previous: Option<f64> = None;
    let mut rho = 0.0;
    for _ in 0..opts.max_iters {
        let w = forward(&v);
        rho = dot(&w, &w);
        let u = adjoint(&w);
        let nu = norm(&u);
        if nu == 0.0 || rho == 0.0 {
            return Ok(0.0);
        }
        if !nu.is_finite() {
            return Err(Error::NotConverged {
                iterations: 0,
                estimate: f64::INFINITY,
            });
        }
        if let Some(p) = previous {
            if (rho - p).abs() <= opts.tol * rho {
                return Ok(rho.sqrt());
            }
        }
        previous = Some(rho);
        v = u.into_iter().map(|c| c / nu).collect();
    }
    Err(Error::NotConverged {
        iterations: opts.max_iters,
        estimate: rho.sqrt(),
    })
}

/// Spectral norm of a dense matrix.
pub fn matrix_norm(matrix: &nalgebra::DMatrix<f64>, opts: &PowerIterationOptions) -> Result<f64> {
    let forward = |x: &[f64]| (matrix * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec();
    let adjoint =
        |y: &[f64]| (matrix.tr_mul(&nalgebra::DVector::from_column_slice(y))).as_slice().to_vec();
    operator_norm(matrix.ncols(), forward, adjoint, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn norm_of(rows: usize, cols: usize, data: &[f64]) -> f64 {
        matrix_norm(&DMatrix::from_row_slice(rows, cols, data), &Default::default()).unwrap()
    }

    #[test]
    fn identity_has_unit_norm() {
        let id = DMatrix::<f64>::identity(5, 5);
        let n = matrix_norm(&id, &Default::default()).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_and_laplacian() {
        assert!((norm_of(2, 2, &[3.0, 0.0, 0.0, 1.0]) - 3.0).abs() < 1e-9);
        // eigenvalues of [[1,-1],[-1,1]] are 0 and 2
        assert!((norm_of(2, 2, &[1.0, -1.0, -1.0, 1.0]) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_operator() {
        assert_eq!(norm_of(2, 3, &[0.0; 6]), 0.0);
    }

    #[test]
    fn agrees_with_svd_on_random_rectangular() {
        let sampler = GaussianSampler::new(11);
        for k in 0..20 {
            let mut rng = sampler.rng(k);
            let data = sampler.vector(&mut rng, 12);
            let m = DMatrix::from_row_slice(3, 4, &data);
            let exact = m.clone().svd(false, false).singular_values.max();
            let est = matrix_norm(&m, &Default::default()).unwrap();
            assert!((est - exact).abs() <= 1e-6 * exact, "{est} vs {exact}");
            assert!(est <= exact * (1.0 + 1e-12));
        }
    }

    #[test]
    fn reports_non_convergence() {
        let opts = PowerIterationOptions {
            max_iters: 2,
            ..Default::default()
        };
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.999]);
        assert!(matches!(
            matrix_norm(&m, &opts),
            Err(Error::NotConverged { iterations: 2, .. })
        ));
    }
}
