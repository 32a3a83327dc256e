//! Multi-class traffic assignment on a link-path network.
//!
//! Class `i` routes `demands[i][k]` units over the paths of origin-destination
//! pair `k`; link `j` carries the total flow of all classes on the paths that
//! contain it and charges `cost_j(flow)`.

use nalgebra::{DMatrix, DVector};

use crate::block::BlockVector;
use crate::error::{invalid, Error, Result};
use crate::operator::{LinearMap, ProxFunction};
use crate::prox::{traffic_potential, ConvexSet, LinkCost, TrafficPotential};
use crate::solver::ProblemInstance;

#[derive(Debug, Clone)]
pub struct TrafficNetwork {
    incidence: DMatrix<f64>,
    costs: Vec<LinkCost>,
    od_pairs: Vec<Vec<usize>>,
    demands: Vec<Vec<f64>>,
    potential: TrafficPotential,
}

impl TrafficNetwork {
    /// `incidence` is the `links x paths` 0/1 matrix; `od_pairs[k]` lists the
    /// paths joining pair `k`; `demands[i][k] >= 0` is the demand of class
    /// `i` on pair `k`.
    pub fn new(
        incidence: DMatrix<f64>,
        costs: Vec<LinkCost>,
        od_pairs: Vec<Vec<usize>>,
        demands: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let (links, paths) = incidence.shape();
        if links == 0 || paths == 0 {
            return Err(Error::Dimension("incidence matrix is empty".into()));
        }
        if incidence.iter().any(|v| *v != 0.0 && *v != 1.0) {
            return Err(invalid("incidence", "entries must be 0 or 1"));
        }
        if let Some(l) = (0..paths).find(|&l| incidence.column(l).iter().all(|v| *v == 0.0)) {
            return Err(invalid("incidence", format!("path {l} uses no link")));
        }
        if costs.len() != links {
            return Err(Error::Dimension(format!("{} link costs for {links} links", costs.len())));
        }
        if demands.is_empty() {
            return Err(invalid("demands", "need at least one user class"));
        }
        if let Some(i) = demands.iter().position(|d| d.len() != od_pairs.len()) {
            return Err(Error::Dimension(format!(
                "class {i} has {} demands for {} origin-destination pairs",
                demands[i].len(),
                od_pairs.len()
            )));
        }
        for d in &demands {
            // validates partitions and demands
            ConvexSet::scaled_simplex(paths, od_pairs.clone(), d.clone())?;
        }
        Ok(Self {
            incidence,
            costs,
            od_pairs,
            demands,
            potential: TrafficPotential::Wardrop,
        })
    }

    pub fn with_potential(mut self, potential: TrafficPotential) -> Self {
        self.potential = potential;
        self
    }

    pub fn incidence(&self) -> &DMatrix<f64> {
        &self.incidence
    }

    pub fn costs(&self) -> &[LinkCost] {
        &self.costs
    }

    pub fn od_pairs(&self) -> &[Vec<usize>] {
        &self.od_pairs
    }

    pub fn demands(&self) -> &[Vec<f64>] {
        &self.demands
    }

    pub fn potential(&self) -> TrafficPotential {
        self.potential
    }

    pub fn num_classes(&self) -> usize {
        self.demands.len()
    }

    pub fn num_paths(&self) -> usize {
        self.incidence.ncols()
    }

    /// The feasible flows `C_i` of class `i`.
    pub fn class_set(&self, i: usize) -> Result<ConvexSet> {
        ConvexSet::scaled_simplex(self.num_paths(), self.od_pairs.clone(), self.demands[i].clone())
    }

    /// Total link flows `sum_i L x_i`.
    pub fn link_flows(&self, x: &BlockVector) -> Vec<f64> {
        let mut total = DVector::zeros(self.num_paths());
        for b in x.blocks() {
            total += DVector::from_column_slice(b);
        }
        (&self.incidence * total).as_slice().to_vec()
    }
}

/// `f_i = indicator(C_i)`, one smooth term (the link potential) with
/// `L_1i = L`, so `beta = 1/(tau m ||L||^2)`.
pub fn build_traffic(net: &TrafficNetwork) -> Result<ProblemInstance> {
    let m = net.num_classes();
    let f = (0..m)
        .map(|i| net.class_set(i).map(ProxFunction::indicator))
        .collect::<Result<Vec<_>>>()?;
    let phi = traffic_potential(net.costs.clone(), net.potential)?;
    let l = LinearMap::dense(net.incidence.clone())?;
    let row = vec![l; m];
    ProblemInstance::variational(f, vec![phi], vec![row])
}

/// Path costs at a flow and the worst deviation from the equilibrium
/// conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct WardropReport {
    pub link_flows: Vec<f64>,
    pub path_costs: Vec<f64>,
    /// Largest `cost(used path) - min cost over the pair`, over all classes
    /// and pairs.
    pub max_violation: f64,
}

/// Paths carrying more than `used_threshold` units of a class count as used.
pub fn wardrop_report(net: &TrafficNetwork, x: &BlockVector, used_threshold: f64) -> WardropReport {
    let link_flows = net.link_flows(x);
    let link_costs = DVector::from_iterator(
        link_flows.len(),
        net.costs.iter().zip(&link_flows).map(|(c, &h)| c.cost(h)),
    );
    let path_costs = net.incidence.tr_mul(&link_costs).as_slice().to_vec();
    let mut max_violation: f64 = 0.0;
    for b in x.blocks() {
        for pair in &net.od_pairs {
            let min = pair.iter().map(|&l| path_costs[l]).fold(f64::INFINITY, f64::min);
            for &l in pair {
                if b[l] > used_threshold {
                    max_violation = max_violation.max(path_costs[l] - min);
                }
            }
        }
    }
    WardropReport {
        link_flows,
        path_costs,
        max_violation,
    }
}
