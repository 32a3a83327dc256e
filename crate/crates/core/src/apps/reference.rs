//! Closed-form recursions of the standard instances, written directly from
//! their specialised update formulas. They share no stepping code with the
//! generic solver and serve as cross-checks for it.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::block::BlockVector;
use crate::error::{invalid, Error, Result};
use crate::operator::{LinearMap, ProxFunction};
use crate::prox::{ConvexSet, LinkCost};

use super::two_agent::TwoAgentCoupling;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    BestApprox,
    ImageM3,
    TwoAgent,
    ParallelProx,
    Traffic,
}

impl ReferenceKind {
    pub const ALL: [ReferenceKind; 5] = [
        ReferenceKind::BestApprox,
        ReferenceKind::ImageM3,
        ReferenceKind::TwoAgent,
        ReferenceKind::ParallelProx,
        ReferenceKind::Traffic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ReferenceKind::BestApprox => "best_approx",
            ReferenceKind::ImageM3 => "image_m3",
            ReferenceKind::TwoAgent => "two_agent",
            ReferenceKind::ParallelProx => "parallel_prox",
            ReferenceKind::Traffic => "traffic",
        }
    }
}

impl fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReferenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| invalid("kind", format!("unsupported reference kind '{s}'")))
    }
}

/// One instance of a specialised recursion with its data.
#[derive(Debug, Clone)]
pub enum ReferenceIteration {
    /// `x_1 <- P_1((1 - gamma sum w) x_1 + gamma sum_i w_i x_i)`,
    /// `x_i <- P_i(gamma w_i x_1 + (1 - gamma w_i) x_i)` for `i >= 2`.
    /// `weights` holds `w_2, ..., w_m`.
    BestApprox { sets: Vec<ConvexSet>, weights: Vec<f64>, gamma: f64 },
    /// `x_i <- prox_{f_i}((z + x_i - sum_{j != i} x_j) / 2)` for three
    /// components.
    ImageM3 { z: Vec<f64>, f: Vec<ProxFunction> },
    /// `x_i <- prox_{gamma f_i}(x_i + gamma L_1i^* (prox_psi - Id)(L_11 x_1 + L_12 x_2))`.
    TwoAgent {
        f: Vec<ProxFunction>,
        l11: LinearMap,
        l12: LinearMap,
        coupling: TwoAgentCoupling,
        gamma: f64,
    },
    /// `x_i <- prox_{f_i/2}((x_1 + x_2) / 2)`.
    ParallelProx { f: Vec<ProxFunction> },
    /// `x_i <- P_{C_i}(x_i - gamma L^T (cost_j((L sum_k x_k)_j))_j)`.
    Traffic {
        incidence: DMatrix<f64>,
        costs: Vec<LinkCost>,
        sets: Vec<ConvexSet>,
        gamma: f64,
    },
}

fn expect_blocks(x: &BlockVector, m: usize) -> Result<()> {
    if x.num_blocks() != m {
        return Err(Error::Dimension(format!("expected {m} blocks, got {}", x.num_blocks())));
    }
    Ok(())
}

impl ReferenceIteration {
    pub fn kind(&self) -> ReferenceKind {
        match self {
            ReferenceIteration::BestApprox { .. } => ReferenceKind::BestApprox,
            ReferenceIteration::ImageM3 { .. } => ReferenceKind::ImageM3,
            ReferenceIteration::TwoAgent { .. } => ReferenceKind::TwoAgent,
            ReferenceIteration::ParallelProx { .. } => ReferenceKind::ParallelProx,
            ReferenceIteration::Traffic { .. } => ReferenceKind::Traffic,
        }
    }

    /// One step of the recursion from `x`.
    pub fn step(&self, x: &BlockVector) -> Result<BlockVector> {
        let out = match self {
            ReferenceIteration::BestApprox { sets, weights, gamma } => {
                let m = sets.len();
                if weights.len() + 1 != m {
                    return Err(Error::Dimension(format!("{} weights for {m} sets", weights.len())));
                }
                expect_blocks(x, m)?;
                let g = *gamma;
                let wsum: f64 = weights.iter().sum();
                let x1 = x.block(0);
                let mut u: Vec<f64> = x1.iter().map(|v| (1.0 - g * wsum) * v).collect();
                for (w, xi) in weights.iter().zip(&x.blocks()[1..]) {
                    for (uj, v) in u.iter_mut().zip(xi) {
                        *uj += g * w * v;
                    }
                }
                let mut out = vec![sets[0].project(&u)];
                for ((set, w), xi) in sets[1..].iter().zip(weights).zip(&x.blocks()[1..]) {
                    let v: Vec<f64> = x1.iter().zip(xi).map(|(a, b)| g * w * a + (1.0 - g * w) * b).collect();
                    out.push(set.project(&v));
                }
                out
            }
            ReferenceIteration::ImageM3 { z, f } => {
                if f.len() != 3 {
                    return Err(Error::Dimension(format!("image_m3 needs 3 components, got {}", f.len())));
                }
                expect_blocks(x, 3)?;
                (0..3)
                    .map(|i| {
                        let v: Vec<f64> = (0..z.len())
                            .map(|t| {
                                let others: f64 = (0..3).filter(|&j| j != i).map(|j| x.block(j)[t]).sum();
                                (z[t] + x.block(i)[t] - others) / 2.0
                            })
                            .collect();
                        f[i].prox(1.0, &v)
                    })
                    .collect()
            }
            ReferenceIteration::TwoAgent { f, l11, l12, coupling, gamma } => {
                if f.len() != 2 {
                    return Err(Error::Dimension(format!("two_agent needs 2 functions, got {}", f.len())));
                }
                expect_blocks(x, 2)?;
                let a = l11.apply(x.block(0));
                let b = l12.apply(x.block(1));
                let s: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
                let pull = coupling.pull(&s);
                [l11, l12]
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        let v: Vec<f64> = x
                            .block(i)
                            .iter()
                            .zip(l.apply_adjoint(&pull))
                            .map(|(xi, w)| xi + gamma * w)
                            .collect();
                        f[i].prox(*gamma, &v)
                    })
                    .collect()
            }
            ReferenceIteration::ParallelProx { f } => {
                if f.len() != 2 {
                    return Err(Error::Dimension(format!("parallel_prox needs 2 functions, got {}", f.len())));
                }
                expect_blocks(x, 2)?;
                let mid: Vec<f64> = x.block(0).iter().zip(x.block(1)).map(|(a, b)| (a + b) / 2.0).collect();
                f.iter().map(|fi| fi.prox(0.5, &mid)).collect()
            }
            ReferenceIteration::Traffic { incidence, costs, sets, gamma } => {
                expect_blocks(x, sets.len())?;
                let n = incidence.ncols();
                let mut total = DVector::zeros(n);
                for b in x.blocks() {
                    total += DVector::from_column_slice(b);
                }
                let nu = incidence * total;
                let c = DVector::from_iterator(nu.len(), costs.iter().zip(nu.iter()).map(|(c, &h)| c.cost(h)));
                let g = incidence.tr_mul(&c);
                sets.iter()
                    .zip(x.blocks())
                    .map(|(set, xi)| {
                        let v: Vec<f64> = xi.iter().zip(g.iter()).map(|(a, d)| a - gamma * d).collect();
                        set.project(&v)
                    })
                    .collect()
            }
        };
        BlockVector::new(out)
    }
}

/// One step of the recursion of `kind` on `state`; the kind must match the
/// instance.
pub fn reference_iteration(kind: &str, iteration: &ReferenceIteration, state: &BlockVector) -> Result<BlockVector> {
    let kind: ReferenceKind = kind.parse()?;
    if kind != iteration.kind() {
        return Err(invalid("kind", format!("instance is '{}', requested '{kind}'", iteration.kind())));
    }
    iteration.step(state)
}
