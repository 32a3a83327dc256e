//! Builders for standard instances of the variational model
//! `minimize sum_i f_i(x_i) + sum_k phi_k(sum_i L_ki x_i)`, each paired with
//! an independent implementation of its closed-form iteration in
//! [`reference`].

pub mod best_approx;
pub mod image;
pub mod reference;
pub mod source;
pub mod traffic;
pub mod two_agent;

pub use best_approx::build_best_approximation;
pub use image::build_image_decomposition;
pub use reference::{reference_iteration, ReferenceIteration, ReferenceKind};
pub use source::build_source_separation;
pub use traffic::{build_traffic, wardrop_report, TrafficNetwork, WardropReport};
pub use two_agent::{build_two_agent, TwoAgentCoupling};

use crate::error::Result;
use crate::operator::LinearMap;

/// `c Id` on `R^dim`, or the zero map for `c = 0`.
pub(crate) fn scaled_id(dim: usize, c: f64) -> Result<LinearMap> {
    if c == 0.0 {
        LinearMap::zero(dim, dim)
    } else {
        LinearMap::scaled_identity(dim, c)
    }
}
