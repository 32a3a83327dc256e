//! Parallel inexact forward-backward splitting for systems of coupled
//! monotone inclusions
//!
//! ```text
//! find x = (x_1, ..., x_m) such that 0 in A_i x_i + B_i(x_1, ..., x_m) for every i,
//! ```
//!
//! where each `A_i` is maximal monotone and known through its resolvent, and
//! `B = (B_1, ..., B_m)` is `beta`-cocoercive on the product space. The solver
//! updates every block from the same snapshot of the previous iterate, so the
//! `m` resolvent evaluations of one iteration run concurrently.
//!
//! The crate is organised bottom-up:
//!
//! - [`block`], [`operator`]: product-space vectors, resolvents, proximable
//!   functions and linear maps.
//! - [`prox`]: projections, proximity operators and smooth gradients.
//! - [`coupling`]: coupling operators with cocoercivity certificates.
//! - [`approx`]: Yosida and rescaled resolvents for approximate steps.
//! - [`solver`]: the iteration, its variational front end and traces.
//! - [`apps`]: ready-made problems with independent reference iterations.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod approx;
pub mod apps;
pub mod block;
pub mod coupling;
pub mod error;
pub mod operator;
pub mod par;
pub mod prox;
pub mod sampling;
pub mod schedule;
pub mod solver;
pub mod spectral;
pub mod trace;

pub use block::{block_norm, BlockVector};
pub use coupling::{
    certify_cocoercivity, cocoercive_composition, gradient_composition, linear_block_coupling,
    mean_deviation_coupling, product_coupling, psd_matrix_coupling, structured_coupling, Certificate,
    CocoerciveMap, CocoercivityReport, CouplingOperator, LinearMode, Provenance,
};
pub use error::{Error, Result};
pub use operator::{check_firmly_nonexpansive, prox_to_resolvent, LinearMap, ProxFunction, Resolvent};
pub use prox::{ConvexSet, LinkCost, SmoothFunction, TrafficPotential};
pub use sampling::GaussianSampler;
pub use approx::ApproximationSchedule;
pub use schedule::{BlockRelaxation, ErrorSchedule, Sequence, SolverConfig, SolverConfigBuilder};
pub use solver::{fixed_point_residual, solve, step, variational_solve, ProblemInstance, Solution, SolverState, Status};
pub use trace::{IterationRecord, IterationTrace};
