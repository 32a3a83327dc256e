use nalgebra::DMatrix;
use parsplit::apps::{
    build_best_approximation, build_image_decomposition, build_traffic, build_two_agent, ReferenceIteration,
    TrafficNetwork, TwoAgentCoupling,
};
use parsplit::{block_norm, step, BlockVector, ConvexSet, GaussianSampler, LinearMap, LinkCost, ProblemInstance, ProxFunction, SolverConfig, SolverState};

const ITERS: usize = 200;
const STARTS: u64 = 5;
const TOL: f64 = 1e-12;

fn compare(problem: &ProblemInstance, config: &SolverConfig, reference: &ReferenceIteration, seed: u64) {
    let sampler = GaussianSampler::new(seed).with_scale(3.0);
    for s in 0..STARTS {
        let x0 = sampler.block_vector(&mut sampler.rng(s), &problem.dims());
        let mut generic = SolverState::new(x0.clone());
        let mut special = x0;
        for n in 0..ITERS {
            generic = step(problem, config, &generic).unwrap();
            special = reference.step(&special).unwrap();
            let gap = block_norm(&generic.x.sub(&special));
            assert!(gap <= TOL, "{}: start {s}, iteration {n}: gap {gap:e}", reference.kind());
        }
    }
}

fn ball(c: Vec<f64>, r: f64) -> ConvexSet {
    ConvexSet::ball(c, r).unwrap()
}

#[test]
fn projection_scheme() {
    let sets = vec![
        ball(vec![0.0, 0.0], 1.0),
        ConvexSet::boxed(vec![2.0, -1.0], vec![3.0, 1.0]).unwrap(),
        ConvexSet::halfspace(vec![1.0, 1.0], -2.0).unwrap(),
    ];
    let weights = vec![1.0, 0.5];
    let p = build_best_approximation(sets.clone(), weights.clone()).unwrap();
    let gamma = 0.4;
    let cfg = p.config_builder().constant_gamma(gamma).build().unwrap();
    let r = ReferenceIteration::BestApprox { sets, weights, gamma };
    compare(&p, &cfg, &r, 1);
}

#[test]
fn midpoint_projection_scheme() {
    let sets = vec![
        ConvexSet::hyperplane(vec![0.0, 1.0], 0.0).unwrap(),
        ball(vec![0.0, 3.0], 1.5),
    ];
    let p = build_best_approximation(sets.clone(), vec![1.0]).unwrap();
    assert_eq!(p.beta(), 0.5);
    let cfg = p.config_builder().constant_gamma(0.5).build().unwrap();
    let r = ReferenceIteration::BestApprox {
        sets,
        weights: vec![1.0],
        gamma: 0.5,
    };
    compare(&p, &cfg, &r, 2);
}

#[test]
fn image_m3_scheme() {
    let z = vec![1.0, -2.0, 0.5, 3.0];
    let f = vec![
        ProxFunction::l1(4, 0.2).unwrap(),
        ProxFunction::scaled_sq_norm(4, 0.5).unwrap(),
        ProxFunction::indicator(ConvexSet::boxed(vec![-1.0; 4], vec![1.0; 4]).unwrap()),
    ];
    let p = build_image_decomposition(z.clone(), f.clone()).unwrap();
    let cfg = p.config_builder().constant_gamma(1.0).build().unwrap();
    let r = ReferenceIteration::ImageM3 { z, f };
    compare(&p, &cfg, &r, 3);
}

#[test]
fn two_prox_scheme() {
    let l11 = LinearMap::dense(DMatrix::from_row_slice(2, 3, &[1.0, 0.5, 0.0, -0.3, 1.0, 2.0])).unwrap();
    let l12 = LinearMap::dense(DMatrix::from_row_slice(2, 2, &[0.7, 0.0, 0.2, -1.1])).unwrap();
    let f = vec![ProxFunction::l1(3, 0.3).unwrap(), ProxFunction::indicator(ball(vec![1.0, 0.0], 2.0))];
    let couplings = [
        TwoAgentCoupling::Quadratic,
        TwoAgentCoupling::Distance(ConvexSet::boxed(vec![-0.5, 0.0], vec![0.5, 1.0]).unwrap()),
        TwoAgentCoupling::Envelope(ProxFunction::l1(2, 0.8).unwrap()),
    ];
    for (k, coupling) in couplings.into_iter().enumerate() {
        let p = build_two_agent(f[0].clone(), f[1].clone(), l11.clone(), l12.clone(), coupling.clone()).unwrap();
        let gamma = 1.5 * p.beta();
        let cfg = p.config_builder().constant_gamma(gamma).build().unwrap();
        let r = ReferenceIteration::TwoAgent {
            f: f.clone(),
            l11: l11.clone(),
            l12: l12.clone(),
            coupling,
            gamma,
        };
        compare(&p, &cfg, &r, 10 + k as u64);
    }
}

#[test]
fn parallel_prox_scheme() {
    let f = vec![
        ProxFunction::indicator(ConvexSet::halfspace(vec![1.0, 2.0], -1.0).unwrap()),
        ProxFunction::indicator(ConvexSet::halfspace(vec![-1.0, 0.5], -3.0).unwrap()),
    ];
    let p = build_two_agent(
        f[0].clone(),
        f[1].clone(),
        LinearMap::identity(2).unwrap(),
        LinearMap::scaled_identity(2, -1.0).unwrap(),
        TwoAgentCoupling::Quadratic,
    )
    .unwrap();
    assert_eq!(p.beta(), 0.5);
    let cfg = p.config_builder().constant_gamma(0.5).build().unwrap();
    compare(&p, &cfg, &ReferenceIteration::ParallelProx { f }, 4);
}

#[test]
fn traffic_scheme() {
    let inc = DMatrix::from_row_slice(3, 4, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let costs = vec![
        LinkCost::affine(1.0, 0.5).unwrap(),
        LinkCost::affine(2.0, 0.0).unwrap(),
        LinkCost::affine(0.5, 1.0).unwrap(),
    ];
    let od = vec![vec![0, 1, 2], vec![3]];
    let demands = vec![vec![1.0, 0.5], vec![2.0, 1.0]];
    let net = TrafficNetwork::new(inc.clone(), costs.clone(), od, demands).unwrap();
    let p = build_traffic(&net).unwrap();
    let gamma = 1.8 * p.beta();
    let cfg = p.config_builder().constant_gamma(gamma).build().unwrap();
    let sets = (0..2).map(|i| net.class_set(i).unwrap()).collect();
    let r = ReferenceIteration::Traffic {
        incidence: inc,
        costs,
        sets,
        gamma,
    };
    compare(&p, &cfg, &r, 5);
}

#[test]
fn single_class_traffic_is_projected_gradient() {
    // hand-rolled projection onto {x >= 0, sum x = 1}
    fn project(u: &[f64]) -> Vec<f64> {
        let mut s = u.to_vec();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut acc = 0.0;
        let mut theta = 0.0;
        for (k, v) in s.iter().enumerate() {
            acc += v;
            let t = (acc - 1.0) / (k as f64 + 1.0);
            if v - t > 0.0 {
                theta = t;
            }
        }
        u.iter().map(|v| (v - theta).max(0.0)).collect()
    }
    let links = [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 0.0]];
    let slopes = [1.0, 3.0, 0.5];
    let inc = DMatrix::from_fn(3, 3, |j, l| links[j][l]);
    let costs = slopes.iter().map(|&a| LinkCost::affine(a, 0.1).unwrap()).collect();
    let net = TrafficNetwork::new(inc, costs, vec![vec![0, 1, 2]], vec![vec![1.0]]).unwrap();
    let p = build_traffic(&net).unwrap();
    let gamma = p.beta();
    let cfg = p.config_builder().constant_gamma(gamma).build().unwrap();
    let mut state = SolverState::new(BlockVector::new(vec![vec![0.9, -0.4, 2.0]]).unwrap());
    let mut x = vec![0.9, -0.4, 2.0];
    for n in 0..ITERS {
        state = step(&p, &cfg, &state).unwrap();
        let nu: Vec<f64> = (0..3).map(|j| (0..3).map(|l| links[j][l] * x[l]).sum()).collect();
        let c: Vec<f64> = (0..3).map(|j| slopes[j] * nu[j] + 0.1).collect();
        let u: Vec<f64> = (0..3).map(|l| x[l] - gamma * (0..3).map(|j| links[j][l] * c[j]).sum::<f64>()).collect();
        x = project(&u);
        let gap = block_norm(&state.x.sub(&BlockVector::new(vec![x.clone()]).unwrap()));
        assert!(gap <= TOL, "iteration {n}: gap {gap:e}");
    }
}
