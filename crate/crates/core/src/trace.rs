//! Per-iteration records and their CSV export.

use std::fmt::Write as _;
use std::io;

/// One executed iteration `n -> n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub gamma: f64,
    pub lambda: f64,
    /// Fixed-point residual at `x_n` with step `gamma_n`.
    pub residual: f64,
    /// `||x_{i,n+1} - x_{i,n}||` for every block.
    pub block_deltas: Vec<f64>,
    pub objective: Option<f64>,
}

/// Records of a run, in iteration order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    blocks: usize,
    records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn new(blocks: usize) -> Self {
        Self {
            blocks,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: IterationRecord) {
        debug_assert_eq!(record.block_deltas.len(), self.blocks);
        debug_assert_eq!(record.iter, self.records.len());
        self.records.push(record);
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.residual).collect()
    }

    /// `iter,gamma,lambda,residual,block_delta_1,...,block_delta_m`, floats
    /// with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,gamma,lambda,residual");
        for i in 1..=self.blocks {
            let _ = write!(out, ",block_delta_{i}");
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(out, "{},{:.16e},{:.16e},{:.16e}", r.iter, r.gamma, r.lambda, r.residual);
            for d in &r.block_deltas {
                let _ = write!(out, ",{d:.16e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}
