//! Command implementations shared by the binary and the tests.

use parsplit::{certify_cocoercivity, solve, BlockVector, GaussianSampler, IterationTrace};
use serde::Serialize;

use crate::config::ProblemConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub kind: String,
    pub status: String,
    pub iterations: usize,
    pub residual: f64,
    pub beta: f64,
    pub provenance: String,
    pub blocks: Vec<Vec<f64>>,
}

/// Builds and solves `cfg`.
pub fn solve_config(cfg: &ProblemConfig) -> Result<(Summary, IterationTrace), CliError> {
    let problem = cfg.build_problem()?;
    let config = cfg.build_solver_config(&problem)?;
    let x0 = cfg.initial_point(&problem)?;
    let sol = solve(&problem, &config, x0)?;
    let summary = Summary {
        kind: cfg.problem.kind().to_string(),
        status: sol.status.as_str().to_string(),
        iterations: sol.iterations,
        residual: sol.residual,
        beta: problem.beta(),
        provenance: problem.certificate().provenance().to_string(),
        blocks: BlockVector::into_blocks(sol.x),
    };
    Ok((summary, sol.trace))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    pub kind: String,
    pub beta: f64,
    pub provenance: String,
    pub pairs: usize,
    pub worst_margin: f64,
    pub max_abs_margin: f64,
    /// `worst_margin >= -1e-9`.
    pub passes: bool,
}

pub const CERTIFY_TOL: f64 = 1e-9;

pub fn certify(cfg: &ProblemConfig, n_pairs: usize, seed: u64) -> Result<CertifyReport, CliError> {
    let problem = cfg.build_problem()?;
    let r = certify_cocoercivity(problem.coupling(), &GaussianSampler::new(seed), n_pairs)?;
    Ok(CertifyReport {
        kind: cfg.problem.kind().to_string(),
        beta: r.beta,
        provenance: problem.certificate().provenance().to_string(),
        pairs: r.pairs,
        worst_margin: r.worst_margin,
        max_abs_margin: r.max_abs_margin,
        passes: r.worst_margin >= -CERTIFY_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindInfo {
    pub kind: &'static str,
    pub description: &'static str,
    pub beta: &'static str,
}

pub fn kinds() -> Vec<KindInfo> {
    vec![
        KindInfo {
            kind: "best_approx",
            description: "weighted best approximation of m convex sets",
            beta: "1/(2(m-1))",
        },
        KindInfo {
            kind: "image_decomposition",
            description: "split an image into m components with a quadratic fit",
            beta: "2/m",
        },
        KindInfo {
            kind: "source_separation",
            description: "recover m sources from p linear mixtures with quadratic data terms",
            beta: "1/(2 p max_k sum_i ||L_ki||^2)",
        },
        KindInfo {
            kind: "traffic",
            description: "multi-class traffic assignment to a Wardrop equilibrium",
            beta: "1/(tau m ||L||^2)",
        },
        KindInfo {
            kind: "two_agent",
            description: "two agents coupled through a smooth penalty",
            beta: "1/(||L_11||^2 + ||L_12||^2)",
        },
        KindInfo {
            kind: "mean_deviation",
            description: "feasibility with the deviation-from-mean coupling",
            beta: "1",
        },
    ]
}
