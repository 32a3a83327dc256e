use nalgebra::DMatrix;
use parsplit::apps::{
    build_best_approximation, build_image_decomposition, build_source_separation, build_traffic, build_two_agent,
    TrafficNetwork, TwoAgentCoupling,
};
use parsplit::coupling::forward_step_expansion;
use parsplit::{
    certify_cocoercivity, cocoercive_composition, gradient_composition, linear_block_coupling, mean_deviation_coupling,
    product_coupling, psd_matrix_coupling, structured_coupling, CocoerciveMap, ConvexSet, CouplingOperator,
    GaussianSampler, LinearMap, LinearMode, LinkCost, ProxFunction, SmoothFunction,
};

const PAIRS: usize = 10_000;

fn dense(rows: usize, cols: usize, v: &[f64]) -> LinearMap {
    LinearMap::dense(DMatrix::from_row_slice(rows, cols, v)).unwrap()
}

fn id(d: usize, c: f64) -> LinearMap {
    if c == 0.0 {
        LinearMap::zero(d, d).unwrap()
    } else {
        LinearMap::scaled_identity(d, c).unwrap()
    }
}

fn couplings() -> Vec<(&'static str, CouplingOperator)> {
    let sym = || {
        vec![
            vec![dense(2, 2, &[2.0, 0.5, 0.5, 1.0]), dense(2, 1, &[1.0, -1.0])],
            vec![dense(1, 2, &[1.0, -1.0]), dense(1, 1, &[3.0])],
        ]
    };
    let mixed = || {
        vec![
            vec![dense(2, 3, &[1.0, 0.0, 2.0, -1.0, 0.5, 0.0]), id(2, 0.0)],
            vec![dense(2, 3, &[0.0, 1.0, 1.0, 1.0, 0.0, 0.0]), dense(2, 2, &[0.3, 1.0, 0.0, -2.0])],
        ]
    };
    let xi = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
    let sat = |beta: f64| {
        CocoerciveMap::new(2, beta, move |y: &[f64]| y.iter().map(|v| v.clamp(-1.0, 1.0) / beta).collect()).unwrap()
    };
    let phi = vec![
        SmoothFunction::scaled_half_sq_norm(2, 1.5).unwrap(),
        SmoothFunction::half_sq_distance_to_set(ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap()).unwrap(),
    ];
    vec![
        ("linear frobenius", linear_block_coupling(sym(), LinearMode::Frobenius).unwrap()),
        ("linear spectral", linear_block_coupling(sym(), LinearMode::Spectral).unwrap()),
        ("psd matrix", psd_matrix_coupling(xi, 2).unwrap()),
        ("mean deviation", mean_deviation_coupling(4, 2).unwrap()),
        ("structured", structured_coupling(mixed()).unwrap()),
        ("cocoercive composition", cocoercive_composition(vec![sat(0.5), sat(2.0)], mixed()).unwrap()),
        ("gradient composition", gradient_composition(phi, mixed()).unwrap()),
        (
            "product",
            product_coupling(
                mean_deviation_coupling(2, 1).unwrap(),
                linear_block_coupling(sym(), LinearMode::Spectral).unwrap(),
            )
            .unwrap(),
        ),
    ]
}

fn builders() -> Vec<(&'static str, CouplingOperator)> {
    let line = |b| ConvexSet::hyperplane(vec![0.0, 1.0], b).unwrap();
    let best = build_best_approximation(vec![line(0.0), line(1.0), line(2.0)], vec![0.5, 1.0]).unwrap();
    let f3 = vec![ProxFunction::zero(2).unwrap(); 3];
    let image = build_image_decomposition(vec![1.0, 2.0], f3).unwrap();
    let source = build_source_separation(
        vec![ProxFunction::zero(2).unwrap(), ProxFunction::zero(1).unwrap()],
        vec![
            vec![id(2, 1.0), dense(2, 1, &[1.0, 2.0])],
            vec![dense(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]), dense(3, 1, &[1.0, 0.0, -1.0])],
        ],
        vec![vec![0.0, 1.0], vec![1.0, 1.0, 1.0]],
    )
    .unwrap();
    let net = TrafficNetwork::new(
        DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]),
        vec![LinkCost::affine(1.0, 0.0).unwrap(), LinkCost::affine(2.0, 1.0).unwrap()],
        vec![vec![0, 1, 2]],
        vec![vec![1.0], vec![0.5]],
    )
    .unwrap();
    let traffic = build_traffic(&net).unwrap();
    let two = build_two_agent(
        ProxFunction::zero(2).unwrap(),
        ProxFunction::zero(1).unwrap(),
        dense(2, 2, &[1.0, 2.0, 0.0, 1.0]),
        dense(2, 1, &[1.0, -1.0]),
        TwoAgentCoupling::Distance(ConvexSet::simplex(2).unwrap()),
    )
    .unwrap();
    vec![
        ("best approximation", best.coupling().clone()),
        ("image decomposition", image.coupling().clone()),
        ("source separation", source.coupling().clone()),
        ("traffic", traffic.coupling().clone()),
        ("two agent", two.coupling().clone()),
    ]
}

#[test]
fn every_coupling_constructor_is_certified() {
    let sampler = GaussianSampler::new(99);
    for (name, b) in couplings() {
        assert!(b.dims().iter().sum::<usize>() <= 8, "{name}");
        let r = certify_cocoercivity(&b, &sampler, PAIRS).unwrap();
        assert!(r.passes(1e-9), "{name}: {r:?}");
    }
}

#[test]
fn mean_deviation_attains_equality() {
    let b = mean_deviation_coupling(4, 2).unwrap();
    let r = certify_cocoercivity(&b, &GaussianSampler::new(5), PAIRS).unwrap();
    assert!(r.max_abs_margin <= 1e-10, "{r:?}");
}

#[test]
fn every_builder_is_certified() {
    let sampler = GaussianSampler::new(7);
    for (name, b) in builders() {
        let r = certify_cocoercivity(&b, &sampler, PAIRS).unwrap();
        assert!(r.passes(1e-9), "{name}: {r:?}");
    }
}

#[test]
fn doubled_beta_is_caught() {
    let b = mean_deviation_coupling(3, 1).unwrap().with_manual_beta(2.0).unwrap();
    let r = certify_cocoercivity(&b, &GaussianSampler::new(1), 1000).unwrap();
    assert!(!r.passes(1e-9));
}

#[test]
fn forward_step_is_nonexpansive() {
    let sampler = GaussianSampler::new(11);
    for (name, b) in couplings().into_iter().chain(builders()) {
        let beta = b.beta();
        let eps = beta.min(1.0) / 100.0;
        for gamma in [eps, beta, 2.0 * beta - eps] {
            let e = forward_step_expansion(&b, gamma, &sampler, 2000).unwrap();
            assert!(e <= 1e-10, "{name}: gamma {gamma}: expansion {e:e}");
        }
    }
}
