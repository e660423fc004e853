use crate::error::{guard, Error, Result};
use crate::graph::{EdgeSet, Graph};
use crate::measures::{Distribution, Space, SubgraphFamily};

/// Largest edge count for the 3^|E| triangular solves.
pub const DECONVOLUTION_EDGE_GUARD: usize = 14;

/// Solved weights smaller than this are treated as rounding noise.
const NEGATIVE_SLACK: f64 = 1e-12;

/// Outcome of inverting a sprinkling or thinning.
#[derive(Clone, Debug, PartialEq)]
pub enum Deconvolution {
    Solved(Distribution),
    /// The unique signed solution has a negative entry, so no probability
    /// measure fits.
    Infeasible { config: usize, weight: f64 },
}

impl Deconvolution {
    pub fn solved(self) -> Option<Distribution> {
        match self {
            Deconvolution::Solved(d) => Some(d),
            Deconvolution::Infeasible { .. } => None,
        }
    }
}

fn edge_count_of(mu: &Distribution, rates: &[f64]) -> Result<usize> {
    let Space::Edges { edges } = mu.space else {
        return Err(Error::SpaceMismatch);
    };
    guard("deconvolution edges", edges as u128, DECONVOLUTION_EDGE_GUARD as u128)?;
    if rates.len() != edges {
        return Err(Error::InvalidParameter(format!("{} rates for {edges} edges", rates.len())));
    }
    Ok(edges)
}

fn finish(space: Space, mut weights: Vec<f64>) -> Result<Deconvolution> {
    if let Some((config, &weight)) = weights.iter().enumerate().filter(|(_, w)| **w < -NEGATIVE_SLACK).min_by(|a, b| a.1.total_cmp(b.1)) {
        return Ok(Deconvolution::Infeasible { config, weight });
    }
    weights.iter_mut().for_each(|w| *w = w.max(0.0));
    Ok(Deconvolution::Solved(Distribution::from_weights(space, weights)?))
}

/// Signed solution of μ = γ ∪ ℙ_p, from the empty configuration upward:
/// μ[ω] = Π_{e∉ω}(1−p_e) Σ_{η⊂ω} γ[η] Π_{e∈ω∖η} p_e.
fn union_solve(mu: &Distribution, p: &[f64]) -> Result<Vec<f64>> {
    let len = edge_count_of(mu, p)?;
    if let Some(&bad) = p.iter().find(|&&p| !(0.0..1.0).contains(&p)) {
        return Err(Error::InvalidParameter(format!("sprinkling rate {bad} must lie in [0,1) to be invertible")));
    }
    let full = (1usize << len) - 1;
    let mut gamma = vec![0.0; 1 << len];
    for omega in 0..=full {
        let closed: f64 = (0..len).filter(|&e| omega >> e & 1 == 0).map(|e| 1.0 - p[e]).product();
        let mut carried = 0.0;
        // proper subsets of ω
        let mut eta = omega;
        while eta != 0 {
            eta = (eta - 1) & omega;
            if gamma[eta] != 0.0 {
                let added = omega & !eta;
                carried += gamma[eta] * (0..len).filter(|&e| added >> e & 1 == 1).map(|e| p[e]).product::<f64>();
            }
        }
        gamma[omega] = mu.probs[omega] / closed - carried;
    }
    Ok(gamma)
}

/// The unique γ with γ ∪ ℙ_p = μ, or the reason none exists.
pub fn deconvolve_union(mu: &Distribution, p: &[f64]) -> Result<Deconvolution> {
    let gamma = union_solve(mu, p)?;
    finish(mu.space, gamma)
}

/// The unique γ with γ ∩ ℙ_p = μ. Complementing every configuration turns
/// an intersection with ℙ_p into a union with ℙ_{1−p}.
pub fn deconvolve_intersect(mu: &Distribution, p: &[f64]) -> Result<Deconvolution> {
    let len = edge_count_of(mu, p)?;
    if let Some(&bad) = p.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::InvalidParameter(format!("thinning rate {bad} must lie in (0,1] to be invertible")));
    }
    let full = (1usize << len) - 1;
    let flipped = Distribution { space: mu.space, probs: (0..=full).map(|m| mu.probs[full ^ m]).collect() };
    let q: Vec<f64> = p.iter().map(|p| 1.0 - p).collect();
    let gamma = union_solve(&flipped, &q)?;
    finish(mu.space, (0..=full).map(|m| gamma[full ^ m]).collect())
}

/// Tries to realise the Σ-marginal Π_{e∈η} x_e with the conditional law of η
/// given ω uniform on {η ∈ Σ : η ⊂ ω}, taking Ω = Σ. The constraints are
/// triangular in inclusion order and are solved from the top down.
pub fn uniform_downward_inversion(graph: &Graph, family: SubgraphFamily, x: &[f64]) -> Result<Deconvolution> {
    let len = graph.edge_count();
    guard("inversion edges", len as u128, DECONVOLUTION_EDGE_GUARD as u128)?;
    if x.len() != len || x.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter("one positive weight per edge".into()));
    }
    let full = (1usize << len) - 1;
    let members: Vec<bool> = (0..=full).map(|m| family.contains(graph, &EdgeSet::from_mask(len, m as u64))).collect();
    let target: Vec<f64> = (0..=full)
        .map(|m| if members[m] { (0..len).filter(|&e| m >> e & 1 == 1).map(|e| x[e]).product() } else { 0.0 })
        .collect();
    let total: f64 = target.iter().sum();
    let below = |omega: usize| {
        let mut count = 0usize;
        let mut eta = omega;
        loop {
            count += usize::from(members[eta]);
            if eta == 0 {
                break count;
            }
            eta = (eta - 1) & omega;
        }
    };
    let mut omega_law = vec![0.0; 1 << len];
    for eta in (0..=full).rev().filter(|&m| members[m]) {
        let from_above: f64 = (0..=full)
            .filter(|&w| members[w] && w != eta && w & eta == eta)
            .map(|w| omega_law[w] / below(w) as f64)
            .sum();
        omega_law[eta] = below(eta) as f64 * (target[eta] / total - from_above);
    }
    finish(Space::Edges { edges: len }, omega_law)
}

/// Σ = {∅, {e}} on a single edge with weight x: infeasible exactly when x > 1.
pub fn exclusion_counterexample(x: f64) -> Result<Deconvolution> {
    uniform_downward_inversion(&Graph::single_edge(), SubgraphFamily::All, &[x])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{edge_measure, exact_distribution, intersect_measure, tv_distance, union_measure, EdgeModel};

    fn law(graph: &Graph, model: EdgeModel) -> Distribution {
        exact_distribution(&edge_measure(graph, &model).unwrap()).unwrap()
    }

    #[test]
    fn union_round_trip() {
        let g = Graph::complete(4);
        let gamma = law(&g, EdgeModel::Family { family: SubgraphFamily::Forests, x: vec![0.7; 6] });
        let p = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let mu = union_measure(&gamma, &law(&g, EdgeModel::Bernoulli { p: p.to_vec() })).unwrap();
        let back = deconvolve_union(&mu, &p).unwrap().solved().unwrap();
        assert!(tv_distance(&back, &gamma).unwrap() < 1e-12);
    }

    #[test]
    fn intersect_round_trip() {
        let g = Graph::theta();
        let gamma = law(&g, EdgeModel::Loop { t: vec![1.5; 3], sources: g.no_vertices() });
        let p = [0.3, 0.6, 0.9];
        let mu = intersect_measure(&gamma, &law(&g, EdgeModel::Bernoulli { p: p.to_vec() })).unwrap();
        let back = deconvolve_intersect(&mu, &p).unwrap().solved().unwrap();
        assert!(tv_distance(&back, &gamma).unwrap() < 1e-12);
    }

    #[test]
    fn bernoulli_below_the_rate_is_infeasible() {
        let g = Graph::path(3);
        let mu = law(&g, EdgeModel::bernoulli_uniform(2, 0.2));
        assert!(matches!(deconvolve_union(&mu, &[0.5, 0.5]).unwrap(), Deconvolution::Infeasible { .. }));
        let ok = deconvolve_union(&mu, &[0.1, 0.1]).unwrap().solved().unwrap();
        assert!(tv_distance(&ok, &law(&g, EdgeModel::bernoulli_uniform(2, 1.0 / 9.0))).unwrap() < 1e-14);
    }

    #[test]
    fn rates_outside_range_rejected() {
        let g = Graph::single_edge();
        let mu = law(&g, EdgeModel::bernoulli_uniform(1, 0.5));
        assert!(deconvolve_union(&mu, &[1.0]).is_err());
        assert!(deconvolve_intersect(&mu, &[0.0]).is_err());
        assert!(deconvolve_union(&mu, &[0.1, 0.1]).is_err());
    }

    #[test]
    fn exclusion_single_edge() {
        for x in [1.25, 2.0, 7.0] {
            match exclusion_counterexample(x).unwrap() {
                Deconvolution::Infeasible { config, weight } => {
                    assert_eq!(config, 0);
                    assert!((weight - (1.0 - x) / (1.0 + x)).abs() < 1e-14);
                }
                other => panic!("expected infeasible, got {other:?}"),
            }
        }
        let d = exclusion_counterexample(0.5).unwrap().solved().unwrap();
        assert!((d.prob(1) - 2.0 / 3.0).abs() < 1e-15);
    }
}
