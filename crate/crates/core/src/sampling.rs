//! Seeded Gaussian samplers for the empirical operator checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::block::BlockVector;

/// Draws independent Gaussian points. Sample `k` depends only on `(seed, k)`,
/// so samples can be generated in any order or in parallel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSampler {
    pub seed: u64,
    pub scale: f64,
}

impl GaussianSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    pub fn vector(&self, rng: &mut impl Rng, dim: usize) -> Vec<f64> {
        (0..dim)
            .map(|_| self.scale * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    /// Pair number `index` of flat vectors.
    pub fn pair(&self, index: u64, dim: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rng = self.rng(index);
        let x = self.vector(&mut rng, dim);
        let y = self.vector(&mut rng, dim);
        (x, y)
    }

    pub fn block_vector(&self, rng: &mut impl Rng, dims: &[usize]) -> BlockVector {
        BlockVector::from_blocks_unchecked(dims.iter().map(|&d| self.vector(rng, d)).collect())
    }

    /// Pair number `index` of block vectors.
    pub fn block_pair(&self, index: u64, dims: &[usize]) -> (BlockVector, BlockVector) {
        let mut rng = self.rng(index);
        let x = self.block_vector(&mut rng, dims);
        let y = self.block_vector(&mut rng, dims);
        (x, y)
    }
}
