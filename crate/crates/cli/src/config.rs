//! JSON problem configuration files.

use nalgebra::DMatrix;
use parsplit::apps::{
    build_best_approximation, build_image_decomposition, build_source_separation, build_traffic, build_two_agent,
    TrafficNetwork, TwoAgentCoupling,
};
use parsplit::{
    mean_deviation_coupling, BlockRelaxation, BlockVector, ConvexSet, ErrorSchedule, GaussianSampler, LinearMap,
    LinkCost, ProblemInstance, ProxFunction, Sequence, SolverConfig, TrafficPotential,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    /// Replaces the derived cocoercivity constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_override: Option<f64>,
    /// Starting blocks; a seeded Gaussian point when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    BestApprox {
        sets: Vec<SetSpec>,
        weights: Vec<f64>,
    },
    ImageDecomposition {
        z: Vec<f64>,
        components: Vec<ProxSpec>,
    },
    SourceSeparation {
        components: Vec<ProxSpec>,
        grid: Vec<Vec<MapSpec>>,
        observations: Vec<Vec<f64>>,
    },
    Traffic {
        incidence: Vec<Vec<f64>>,
        costs: Vec<CostSpec>,
        od_pairs: Vec<Vec<usize>>,
        demands: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "PotentialSpec::is_wardrop")]
        potential: PotentialSpec,
    },
    TwoAgent {
        f1: ProxSpec,
        f2: ProxSpec,
        l11: MapSpec,
        l12: MapSpec,
        coupling: CouplingSpec,
    },
    MeanDeviation {
        sets: Vec<SetSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Halfspace { normal: Vec<f64>, offset: f64 },
    Hyperplane { normal: Vec<f64>, offset: f64 },
    Singleton { point: Vec<f64> },
    Simplex { dim: usize },
    ScaledSimplex { dim: usize, groups: Vec<Vec<usize>>, masses: Vec<f64> },
    Affine { origin: Vec<f64>, basis: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProxSpec {
    Zero { dim: usize },
    L1 { dim: usize, weight: f64 },
    /// `c/2 ||.||^2`.
    SqNorm { dim: usize, c: f64 },
    /// `1/2 ||. - target||^2`.
    HalfSqDistance { target: Vec<f64> },
    Indicator { set: SetSpec },
}

/// A dense matrix given by rows, or `scale * Id` on `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Dense(Vec<Vec<f64>>),
    Scaled { dim: usize, scale: f64 },
}

/// Affine link cost `slope * h + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Wardrop,
    SocialOptimum { lipschitz: f64 },
}

impl PotentialSpec {
    fn is_wardrop(&self) -> bool {
        *self == PotentialSpec::Wardrop
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingSpec {
    Quadratic,
    Distance { set: SetSpec },
    Envelope { psi: ProxSpec },
}

/// `scale / (n + 1)^power`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub scale: f64,
    pub power: f64,
}

/// Errors `scale / (n + 1)^power * directions[i]` in block `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSpec {
    pub scale: f64,
    pub power: f64,
    /// One direction per block.
    pub directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primal_errors: Option<ErrorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_errors: Option<ErrorSpec>,
    /// Per-block deviations `lambda_{i,n} - lambda_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_relaxation: Option<Vec<DecaySpec>>,
}

impl SetSpec {
    pub fn build(&self) -> parsplit::Result<ConvexSet> {
        match self {
            SetSpec::Box { lo, hi } => ConvexSet::boxed(lo.clone(), hi.clone()),
            SetSpec::Ball { center, radius } => ConvexSet::ball(center.clone(), *radius),
            SetSpec::Halfspace { normal, offset } => ConvexSet::halfspace(normal.clone(), *offset),
            SetSpec::Hyperplane { normal, offset } => ConvexSet::hyperplane(normal.clone(), *offset),
            SetSpec::Singleton { point } => ConvexSet::singleton(point.clone()),
            SetSpec::Simplex { dim } => ConvexSet::simplex(*dim),
            SetSpec::ScaledSimplex { dim, groups, masses } => {
                ConvexSet::scaled_simplex(*dim, groups.clone(), masses.clone())
            }
            SetSpec::Affine { origin, basis } => ConvexSet::affine(origin.clone(), basis.clone()),
        }
    }
}

impl ProxSpec {
    pub fn build(&self) -> parsplit::Result<ProxFunction> {
        match self {
            ProxSpec::Zero { dim } => ProxFunction::zero(*dim),
            ProxSpec::L1 { dim, weight } => ProxFunction::l1(*dim, *weight),
            ProxSpec::SqNorm { dim, c } => ProxFunction::scaled_sq_norm(*dim, *c),
            ProxSpec::HalfSqDistance { target } => ProxFunction::half_sq_distance_to(target.clone()),
            ProxSpec::Indicator { set } => set.build().map(ProxFunction::indicator),
        }
    }
}

fn dense(rows: &[Vec<f64>], field: &str) -> Result<DMatrix<f64>, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(CliError::Config(format!("{field}: matrix is empty")));
    }
    if let Some(k) = rows.iter().position(|row| row.len() != c) {
        return Err(CliError::Config(format!("{field}: row {k} has {} entries, expected {c}", rows[k].len())));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl MapSpec {
    pub fn build(&self, field: &str) -> Result<LinearMap, CliError> {
        Ok(match self {
            MapSpec::Dense(rows) => LinearMap::dense(dense(rows, field)?)?,
            MapSpec::Scaled { dim, scale } if *scale == 0.0 => LinearMap::zero(*dim, *dim)?,
            MapSpec::Scaled { dim, scale } => LinearMap::scaled_identity(*dim, *scale)?,
        })
    }
}

impl DecaySpec {
    fn sequence(&self) -> Sequence {
        Sequence::decay(self.scale, self.power)
    }
}

impl ErrorSpec {
    fn build(&self) -> parsplit::Result<ErrorSchedule> {
        ErrorSchedule::new(Sequence::decay(self.scale, self.power), self.directions.clone(), None)
    }
}

fn collect<T, U>(items: &[T], f: impl Fn(&T) -> parsplit::Result<U>) -> parsplit::Result<Vec<U>> {
    items.iter().map(f).collect()
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::BestApprox { .. } => "best_approx",
            ProblemSpec::ImageDecomposition { .. } => "image_decomposition",
            ProblemSpec::SourceSeparation { .. } => "source_separation",
            ProblemSpec::Traffic { .. } => "traffic",
            ProblemSpec::TwoAgent { .. } => "two_agent",
            ProblemSpec::MeanDeviation { .. } => "mean_deviation",
        }
    }

    pub fn build(&self) -> Result<ProblemInstance, CliError> {
        Ok(match self {
            ProblemSpec::BestApprox { sets, weights } => {
                build_best_approximation(collect(sets, SetSpec::build)?, weights.clone())?
            }
            ProblemSpec::ImageDecomposition { z, components } => {
                build_image_decomposition(z.clone(), collect(components, ProxSpec::build)?)?
            }
            ProblemSpec::SourceSeparation {
                components,
                grid,
                observations,
            } => {
                let grid = grid
                    .iter()
                    .enumerate()
                    .map(|(k, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(i, m)| m.build(&format!("grid[{k}][{i}]")))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                build_source_separation(collect(components, ProxSpec::build)?, grid, observations.clone())?
            }
            ProblemSpec::Traffic {
                incidence,
                costs,
                od_pairs,
                demands,
                potential,
            } => {
                let costs = collect(costs, |c| LinkCost::affine(c.slope, c.intercept))?;
                let potential = match potential {
                    PotentialSpec::Wardrop => TrafficPotential::Wardrop,
                    PotentialSpec::SocialOptimum { lipschitz } => TrafficPotential::SocialOptimum {
                        lipschitz: *lipschitz,
                    },
                };
                let net = TrafficNetwork::new(dense(incidence, "incidence")?, costs, od_pairs.clone(), demands.clone())?
                    .with_potential(potential);
                build_traffic(&net)?
            }
            ProblemSpec::TwoAgent {
                f1,
                f2,
                l11,
                l12,
                coupling,
            } => {
                let coupling = match coupling {
                    CouplingSpec::Quadratic => TwoAgentCoupling::Quadratic,
                    CouplingSpec::Distance { set } => TwoAgentCoupling::Distance(set.build()?),
                    CouplingSpec::Envelope { psi } => TwoAgentCoupling::Envelope(psi.build()?),
                };
                build_two_agent(f1.build()?, f2.build()?, l11.build("l11")?, l12.build("l12")?, coupling)?
            }
            ProblemSpec::MeanDeviation { sets } => {
                let sets = collect(sets, SetSpec::build)?;
                let d = sets.first().map_or(0, ConvexSet::dim);
                if let Some(i) = sets.iter().position(|s| s.dim() != d) {
                    return Err(CliError::Config(format!("sets[{i}] has dimension {}, expected {d}", sets[i].dim())));
                }
                let coupling = mean_deviation_coupling(sets.len(), d)?;
                let res = sets.into_iter().map(|s| ProxFunction::indicator(s).to_resolvent()).collect();
                ProblemInstance::new(res, coupling)?
            }
        })
    }
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    /// The problem with `beta_override` applied.
    pub fn build_problem(&self) -> Result<ProblemInstance, CliError> {
        let p = self.problem.build()?;
        match self.beta_override {
            None => Ok(p),
            Some(beta) => {
                let coupling = p.coupling().clone().with_manual_beta(beta)?;
                Ok(ProblemInstance::new(p.resolvents().to_vec(), coupling)?)
            }
        }
    }

    pub fn build_solver_config(&self, problem: &ProblemInstance) -> Result<SolverConfig, CliError> {
        let s = &self.solver;
        let mut b = problem.config_builder();
        if let Some(g) = s.gamma {
            b = b.constant_gamma(g);
        }
        if let Some(l) = s.lambda {
            b = b.constant_lambda(l);
        }
        if let Some(t) = s.tol {
            b = b.tolerance(t);
        }
        if let Some(n) = s.max_iter {
            b = b.max_iterations(n);
        }
        if let Some(w) = s.workers {
            b = b.workers(w);
        }
        if let Some(e) = &s.primal_errors {
            b = b.primal_errors(e.build()?);
        }
        if let Some(e) = &s.coupling_errors {
            b = b.coupling_errors(e.build()?);
        }
        if let Some(r) = &s.block_relaxation {
            b = b.block_relaxation(BlockRelaxation::new(r.iter().map(DecaySpec::sequence).collect(), None));
        }
        Ok(b.build()?)
    }

    pub fn initial_point(&self, problem: &ProblemInstance) -> Result<BlockVector, CliError> {
        match &self.initial {
            Some(blocks) => {
                let x = BlockVector::new(blocks.clone())?;
                if !x.has_dims(&problem.dims()) {
                    return Err(CliError::Config(format!(
                        "initial: block dimensions {:?}, expected {:?}",
                        x.dims(),
                        problem.dims()
                    )));
                }
                Ok(x)
            }
            None => {
                let s = GaussianSampler::new(self.solver.seed.unwrap_or(0));
                Ok(s.block_vector(&mut s.rng(0), &problem.dims()))
            }
        }
    }
}
