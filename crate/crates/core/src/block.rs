//! Elements of the product space `H_1 x ... x H_m`.

use crate::error::{Error, Result};

/// Euclidean inner product of two equally sized slices.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Euclidean norm of a slice.
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `x - y`, componentwise.
pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// A point of the product space, stored block by block.
///
/// Every block has positive length; the product norm is the square root of
/// the sum of the squared block norms.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    blocks: Vec<Vec<f64>>,
}

impl BlockVector {
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Dimension("a block vector needs at least one block".into()));
        }
        if let Some(i) = blocks.iter().position(Vec::is_empty) {
            return Err(Error::Dimension(format!("block {i} is zero-dimensional")));
        }
        Ok(Self { blocks })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        Self::new(dims.iter().map(|&d| vec![0.0; d]).collect())
    }

    /// Splits a flat coordinate array into blocks of the given sizes.
    pub fn from_flat(dims: &[usize], flat: &[f64]) -> Result<Self> {
        let total: usize = dims.iter().sum();
        if total != flat.len() {
            return Err(Error::Dimension(format!(
                "flat vector has {} coordinates, dims sum to {total}",
                flat.len()
            )));
        }
        let mut blocks = Vec::with_capacity(dims.len());
        let mut offset = 0;
        for &d in dims {
            blocks.push(flat[offset..offset + d].to_vec());
            offset += d;
        }
        Self::new(blocks)
    }

    /// Assembles blocks that are already known to be well formed.
    pub(crate) fn from_blocks_unchecked(blocks: Vec<Vec<f64>>) -> Self {
        debug_assert!(!blocks.is_empty() && blocks.iter().all(|b| !b.is_empty()));
        Self { blocks }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Vec<f64>> {
        self.blocks
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn has_dims(&self, dims: &[usize]) -> bool {
        self.blocks.len() == dims.len() && self.blocks.iter().zip(dims).all(|(b, &d)| b.len() == d)
    }

    /// Product-space inner product.
    pub fn dot(&self, other: &BlockVector) -> f64 {
        debug_assert!(other.has_dims(&self.dims()));
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| dot(a, b))
            .sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.blocks.iter().map(|b| dot(b, b)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn sub(&self, other: &BlockVector) -> BlockVector {
        debug_assert!(other.has_dims(&self.dims()));
        Self::from_blocks_unchecked(
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| sub(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> BlockVector {
        Self::from_blocks_unchecked(
            self.blocks
                .iter()
                .map(|b| b.iter().map(|v| c * v).collect())
                .collect(),
        )
    }
}

/// Product norm `sqrt(sum_i ||x_i||^2)`.
pub fn block_norm(x: &BlockVector) -> f64 {
    x.norm()
}
