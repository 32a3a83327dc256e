//! Built-in demonstration configurations.

use crate::config::{
    CostSpec, CouplingSpec, DecaySpec, ErrorSpec, MapSpec, PotentialSpec, ProblemConfig, ProblemSpec, ProxSpec, SetSpec,
    SolverSpec,
};

pub const DEMOS: [&str; 7] = [
    "best-approx-demo",
    "noisy-best-approx-demo",
    "image-demo",
    "source-demo",
    "traffic-demo",
    "two-agent-demo",
    "mean-deviation-demo",
];

fn line(offset: f64) -> SetSpec {
    SetSpec::Hyperplane {
        normal: vec![0.0, 1.0],
        offset,
    }
}

fn solver(tol: f64, max_iter: usize) -> SolverSpec {
    SolverSpec {
        tol: Some(tol),
        max_iter: Some(max_iter),
        ..SolverSpec::default()
    }
}

fn parallel_lines() -> ProblemSpec {
    ProblemSpec::BestApprox {
        sets: vec![line(0.0), line(1.0)],
        weights: vec![1.0],
    }
}

pub fn demo(name: &str) -> Option<ProblemConfig> {
    let cfg = match name {
        "best-approx-demo" => ProblemConfig {
            problem: parallel_lines(),
            solver: SolverSpec {
                gamma: Some(0.3),
                ..solver(1e-10, 10_000)
            },
            beta_override: None,
            initial: Some(vec![vec![-2.0, 3.0], vec![5.0, -1.5]]),
        },
        "noisy-best-approx-demo" => {
            let normal = vec![vec![0.0, 1.0], vec![0.0, 1.0]];
            let errors = ErrorSpec {
                scale: 0.1,
                power: 2.0,
                directions: normal,
            };
            ProblemConfig {
                problem: parallel_lines(),
                solver: SolverSpec {
                    lambda: Some(0.2),
                    primal_errors: Some(errors.clone()),
                    coupling_errors: Some(errors),
                    block_relaxation: Some(vec![DecaySpec { scale: 0.1, power: 2.0 }; 2]),
                    ..solver(1e-8, 10_000)
                },
                beta_override: None,
                initial: Some(vec![vec![-2.0, 3.0], vec![5.0, -1.5]]),
            }
        }
        "image-demo" => ProblemConfig {
            problem: ProblemSpec::ImageDecomposition {
                z: vec![1.0, -2.0, 0.5, 3.0],
                components: vec![
                    ProxSpec::L1 { dim: 4, weight: 0.2 },
                    ProxSpec::SqNorm { dim: 4, c: 1.0 },
                    ProxSpec::Indicator {
                        set: SetSpec::Box {
                            lo: vec![-1.0; 4],
                            hi: vec![1.0; 4],
                        },
                    },
                ],
            },
            solver: SolverSpec {
                gamma: Some(1.0),
                seed: Some(3),
                ..solver(1e-10, 10_000)
            },
            beta_override: None,
            initial: None,
        },
        "source-demo" => ProblemConfig {
            problem: ProblemSpec::SourceSeparation {
                components: vec![ProxSpec::L1 { dim: 4, weight: 0.1 }; 2],
                grid: vec![vec![MapSpec::Scaled { dim: 4, scale: 1.0 }; 2]],
                observations: vec![vec![1.0, -0.5, 0.05, 2.0]],
            },
            solver: SolverSpec {
                seed: Some(5),
                ..solver(1e-10, 20_000)
            },
            beta_override: None,
            initial: None,
        },
        "traffic-demo" => ProblemConfig {
            problem: ProblemSpec::Traffic {
                incidence: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                costs: vec![
                    CostSpec {
                        slope: 1.0,
                        intercept: 0.0,
                    },
                    CostSpec {
                        slope: 2.0,
                        intercept: 0.0,
                    },
                ],
                od_pairs: vec![vec![0, 1]],
                demands: vec![vec![1.0]],
                potential: PotentialSpec::Wardrop,
            },
            solver: solver(1e-10, 10_000),
            beta_override: None,
            initial: Some(vec![vec![0.0, 1.0]]),
        },
        "two-agent-demo" => ProblemConfig {
            problem: ProblemSpec::TwoAgent {
                f1: ProxSpec::L1 { dim: 3, weight: 0.3 },
                f2: ProxSpec::Indicator {
                    set: SetSpec::Ball {
                        center: vec![1.0, 0.0],
                        radius: 2.0,
                    },
                },
                l11: MapSpec::Dense(vec![vec![1.0, 0.5, 0.0], vec![-0.3, 1.0, 2.0]]),
                l12: MapSpec::Dense(vec![vec![0.7, 0.0], vec![0.2, -1.1]]),
                coupling: CouplingSpec::Distance {
                    set: SetSpec::Box {
                        lo: vec![-0.5, 0.0],
                        hi: vec![0.5, 1.0],
                    },
                },
            },
            solver: SolverSpec {
                seed: Some(7),
                ..solver(1e-10, 20_000)
            },
            beta_override: None,
            initial: None,
        },
        "mean-deviation-demo" => ProblemConfig {
            problem: ProblemSpec::MeanDeviation {
                sets: vec![
                    SetSpec::Ball {
                        center: vec![0.0, 0.0],
                        radius: 1.0,
                    },
                    SetSpec::Halfspace {
                        normal: vec![-1.0, 0.0],
                        offset: -0.5,
                    },
                    SetSpec::Box {
                        lo: vec![-2.0, 0.2],
                        hi: vec![2.0, 3.0],
                    },
                ],
            },
            solver: SolverSpec {
                seed: Some(11),
                ..solver(1e-10, 20_000)
            },
            beta_override: None,
            initial: None,
        },
        _ => return None,
    };
    Some(cfg)
}
