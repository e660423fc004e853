use super::{Measure, Space};
use crate::chains::{is_divergence_free, ChainQ};
use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph, VertexSet};

/// Families Σ of spanning subgraphs used by the sprinkling constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubgraphFamily {
    All,
    Forests,
    Even,
    Matchings,
}

impl SubgraphFamily {
    pub fn contains(&self, graph: &Graph, omega: &EdgeSet) -> bool {
        match self {
            SubgraphFamily::All => true,
            SubgraphFamily::Forests => graph.cyclomatic_number(omega) == 0,
            SubgraphFamily::Even => graph.boundary_gf2(omega).is_empty(),
            SubgraphFamily::Matchings => {
                let mut used = vec![false; graph.vertex_count()];
                for e in omega.iter() {
                    let (u, v) = graph.endpoints(e);
                    if used[u] || used[v] {
                        return false;
                    }
                    used[u] = true;
                    used[v] = true;
                }
                true
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SubgraphFamily::All => "all",
            SubgraphFamily::Forests => "forests",
            SubgraphFamily::Even => "even",
            SubgraphFamily::Matchings => "matchings",
        }
    }
}

/// Measures on bond configurations.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeModel {
    /// Independent bonds.
    Bernoulli { p: Vec<f64> },
    /// Π p^ω (1−p)^(E∖ω) q^κ(ω).
    RandomCluster { p: Vec<f64>, q: f64 },
    /// Loop O(1) with sources: Π_{e∈ω} t_e on ∂ω = A. Weights above 1 give
    /// the antiferromagnetic version.
    Loop { t: Vec<f64>, sources: VertexSet },
    /// Π_{e∈ω} x_e on a family; forests give the arboreal gas.
    Family { family: SubgraphFamily, x: Vec<f64> },
    /// Loop O(n): 1[∂η=∅] x^|η| n^κ⁰(η) on graphs of maximum degree 3.
    LoopOn { x: Vec<f64>, n: f64 },
}

impl EdgeModel {
    pub fn bernoulli_uniform(edges: usize, p: f64) -> Self {
        EdgeModel::Bernoulli { p: vec![p; edges] }
    }

    pub fn loop_o1(t: Vec<f64>, sources: VertexSet) -> Self {
        EdgeModel::Loop { t, sources }
    }

    fn validate(&self, graph: &Graph) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let len = graph.edge_count();
        let check_len = |v: &Vec<f64>| if v.len() == len { Ok(()) } else { bad(format!("{} parameters for {len} edges", v.len())) };
        match self {
            EdgeModel::Bernoulli { p } => {
                check_len(p)?;
                if p.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return bad("Bernoulli p outside [0,1]".into());
                }
            }
            EdgeModel::RandomCluster { p, q } => {
                check_len(p)?;
                if p.iter().any(|&p| !(0.0..=1.0).contains(&p)) || !(*q > 0.0) {
                    return bad("random-cluster needs p in [0,1], q > 0".into());
                }
            }
            EdgeModel::Loop { t, sources } => {
                check_len(t)?;
                if t.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
                    return bad("loop weight must be positive".into());
                }
                if sources.count() % 2 == 1 {
                    return Err(Error::OddSourceSet(sources.count()));
                }
            }
            EdgeModel::Family { x, .. } => {
                check_len(x)?;
                if x.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return bad("family weight must be positive".into());
                }
            }
            EdgeModel::LoopOn { x, n } => {
                check_len(x)?;
                if x.iter().any(|&x| !(x > 0.0)) || !(*n >= 0.0) {
                    return bad("loop O(n) needs x > 0, n >= 0".into());
                }
                if let Some(v) = (0..graph.vertex_count()).find(|&v| graph.degree(v) > 3) {
                    return Err(Error::DegreeViolation { vertex: v, degree: graph.degree(v), max: 3 });
                }
            }
        }
        Ok(())
    }
}

/// Number of clusters of ω containing at least one edge.
pub fn loop_components(graph: &Graph, omega: &EdgeSet) -> usize {
    let mut touched = vec![false; graph.vertex_count()];
    for e in omega.iter() {
        let (u, v) = graph.endpoints(e);
        touched[u] = true;
        touched[v] = true;
    }
    let isolated = touched.iter().filter(|&&t| !t).count();
    graph.kappa(omega) - isolated
}

fn product_over(omega: &EdgeSet, w: &[f64]) -> f64 {
    omega.iter().map(|e| w[e]).product()
}

pub fn edge_measure_weight(graph: &Graph, model: &EdgeModel, omega: &EdgeSet) -> Result<f64> {
    model.validate(graph)?;
    Ok(weight_unchecked(graph, model, omega))
}

fn weight_unchecked(graph: &Graph, model: &EdgeModel, omega: &EdgeSet) -> f64 {
    match model {
        EdgeModel::Bernoulli { p } => {
            (0..graph.edge_count()).map(|e| if omega.contains(e) { p[e] } else { 1.0 - p[e] }).product()
        }
        EdgeModel::RandomCluster { p, q } => {
            let bern: f64 = (0..graph.edge_count()).map(|e| if omega.contains(e) { p[e] } else { 1.0 - p[e] }).product();
            if bern == 0.0 {
                0.0
            } else {
                bern * q.powi(graph.kappa(omega) as i32)
            }
        }
        EdgeModel::Loop { t, sources } => {
            if graph.boundary_gf2(omega) == *sources {
                product_over(omega, t)
            } else {
                0.0
            }
        }
        EdgeModel::Family { family, x } => {
            if family.contains(graph, omega) {
                product_over(omega, x)
            } else {
                0.0
            }
        }
        EdgeModel::LoopOn { x, n } => {
            if graph.boundary_gf2(omega).is_empty() {
                product_over(omega, x) * n.powi(loop_components(graph, omega) as i32)
            } else {
                0.0
            }
        }
    }
}

/// Enumerated weights over all bond configurations.
pub fn edge_measure(graph: &Graph, model: &EdgeModel) -> Result<Measure> {
    model.validate(graph)?;
    let len = graph.edge_count();
    Measure::from_fn(Space::Edges { edges: len }, |mask| weight_unchecked(graph, model, &EdgeSet::from_mask(len, mask as u64)))
}

/// q-flow weight Π_{e ∈ supp η} x_e for divergence-free η.
pub fn qflow_weight(graph: &Graph, x: &[f64], eta: &ChainQ) -> Result<f64> {
    if !is_divergence_free(graph, eta) {
        return Err(Error::NotDivergenceFree);
    }
    Ok(product_over(&eta.support(), x))
}

/// Enumerated q-flow measure over all chains (zero off the kernel).
pub fn qflow_measure(graph: &Graph, q: u32, x: &[f64]) -> Result<Measure> {
    let len = graph.edge_count();
    Measure::from_fn(Space::Chains { cells: len, q }, |i| {
        let eta = ChainQ::from_index(q, len, i);
        qflow_weight(graph, x, &eta).unwrap_or(0.0)
    })
}
