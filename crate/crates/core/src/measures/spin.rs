use super::current::{traced_current_exact, vertex_mask};
use super::{digits, Measure, Space};
use crate::error::{guard, Error, Result};
use crate::graph::{EdgeSet, Graph, VertexSet};

/// Largest vertex count for the nested spin sums.
const NESTED_VERTEX_GUARD: usize = 16;

/// Spin measures. Colors are residues in [0, q); for ±1 models color 0 is +1
/// and color 1 is −1.
#[derive(Clone, Debug, PartialEq)]
pub enum SpinModel {
    /// exp(Σ J σ_u σ_v).
    Ising { j: Vec<f64> },
    /// Satisfied-edge form: Π over disagreeing edges of e^{−2J}.
    Potts { j: Vec<f64>, q: u32 },
    /// Law of the product of two independent Ising samples, with weight
    /// Z_{S(σ), 2J}.
    Xor { j: Vec<f64> },
    /// μ[σ] · ℙ_{S(σ), p}[F_A].
    IsingSources { j: Vec<f64>, sources: VertexSet },
    /// Z^{A△B}_{S(σ),2J} · 𝐏^{A△B}_{S(σ),2J}[F_A], which is
    /// ⟨τ_{A△B}⟩_{S(σ),2J} 𝐏^{A△B}_{S(σ),2J}[F_A] μ^XOR[σ] up to a constant.
    XorSources { j: Vec<f64>, a: VertexSet, b: VertexSet },
}

impl SpinModel {
    pub fn q(&self) -> u32 {
        match self {
            SpinModel::Potts { q, .. } => *q,
            _ => 2,
        }
    }

    fn couplings(&self) -> &[f64] {
        match self {
            SpinModel::Ising { j }
            | SpinModel::Potts { j, .. }
            | SpinModel::Xor { j }
            | SpinModel::IsingSources { j, .. }
            | SpinModel::XorSources { j, .. } => j,
        }
    }

    fn validate(&self, graph: &Graph) -> Result<()> {
        let j = self.couplings();
        if j.len() != graph.edge_count() || j.iter().any(|&j| !(j >= 0.0 && j.is_finite())) {
            return Err(Error::InvalidParameter("one finite nonnegative coupling per edge".into()));
        }
        if self.q() < 2 {
            return Err(Error::InvalidParameter("q >= 2".into()));
        }
        match self {
            SpinModel::Xor { .. } | SpinModel::IsingSources { .. } | SpinModel::XorSources { .. } => {
                guard("vertices for nested spin sums", graph.vertex_count() as u128, NESTED_VERTEX_GUARD as u128)?;
            }
            _ => {}
        }
        for set in match self {
            SpinModel::IsingSources { sources, .. } => vec![sources],
            SpinModel::XorSources { a, b, .. } => vec![a, b],
            _ => vec![],
        } {
            if set.count() % 2 == 1 {
                return Err(Error::OddSourceSet(set.count()));
            }
        }
        Ok(())
    }
}

/// Edges whose endpoints carry equal colors.
pub fn satisfied_edges(graph: &Graph, sigma: &[u32]) -> EdgeSet {
    EdgeSet::from_indices(graph.edge_count(), (0..graph.edge_count()).filter(|&e| {
        let (u, v) = graph.endpoints(e);
        sigma[u] == sigma[v]
    }))
}

/// Σ_τ τ_C exp(Σ_{e∈S} J_e τ_u τ_v) over τ ∈ {±1}^V.
fn ising_sum(graph: &Graph, s: &EdgeSet, j: &[f64], correlator: u64) -> f64 {
    let n = graph.vertex_count();
    let edges: Vec<usize> = s.iter().collect();
    (0u64..1 << n)
        .map(|tau| {
            let energy: f64 = edges
                .iter()
                .map(|&e| {
                    let (u, v) = graph.endpoints(e);
                    if (tau >> u ^ tau >> v) & 1 == 0 { j[e] } else { -j[e] }
                })
                .sum();
            let sign = if (tau & correlator).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * energy.exp()
        })
        .sum()
}

fn weight_unchecked(graph: &Graph, model: &SpinModel, sigma: &[u32]) -> Result<f64> {
    let s = satisfied_edges(graph, sigma);
    Ok(match model {
        SpinModel::Ising { j } => (0..graph.edge_count()).map(|e| if s.contains(e) { j[e] } else { -j[e] }).sum::<f64>().exp(),
        SpinModel::Potts { j, .. } => (-2.0 * (0..graph.edge_count()).filter(|&e| !s.contains(e)).map(|e| j[e]).sum::<f64>()).exp(),
        SpinModel::Xor { j } => {
            let doubled: Vec<f64> = j.iter().map(|j| 2.0 * j).collect();
            ising_sum(graph, &s, &doubled, 0)
        }
        SpinModel::IsingSources { j, sources } => {
            let mu = weight_unchecked(graph, &SpinModel::Ising { j: j.clone() }, sigma)?;
            let p: Vec<f64> = j.iter().map(|&j| -(-2.0 * j).exp_m1()).collect();
            mu * percolation_fa_probability(graph, &s, &p, sources)?
        }
        SpinModel::XorSources { j, a, b } => {
            let c = a.symmetric_difference(b);
            let doubled: Vec<f64> = j.iter().map(|j| 2.0 * j).collect();
            let z_c = ising_sum(graph, &s, &doubled, vertex_mask(&c));
            if z_c <= 0.0 {
                return Ok(0.0);
            }
            let (sub, _) = graph.restrict(&s);
            let sub_j: Vec<f64> = s.iter().map(|e| doubled[e]).collect();
            let current = match traced_current_exact(&sub, &c, &sub_j) {
                Ok(d) => d,
                Err(Error::EmptySupport) => return Ok(0.0),
                Err(e) => return Err(e),
            };
            let mut in_fa = 0.0;
            for (mask, pr) in current.support() {
                let omega = EdgeSet::from_mask(sub.edge_count(), mask as u64);
                if sub.in_event_fa(&omega, a)? {
                    in_fa += pr;
                }
            }
            z_c * in_fa
        }
    })
}

/// ℙ_{S,p}[F_A], enumerating subsets of S.
fn percolation_fa_probability(graph: &Graph, s: &EdgeSet, p: &[f64], sources: &VertexSet) -> Result<f64> {
    let edges: Vec<usize> = s.iter().collect();
    guard("percolation subsets", 1u128 << edges.len(), 1 << 24)?;
    let mut total = 0.0;
    for sub in 0u64..1 << edges.len() {
        let omega = EdgeSet::from_indices(graph.edge_count(), (0..edges.len()).filter(|&k| sub >> k & 1 == 1).map(|k| edges[k]));
        if graph.in_event_fa(&omega, sources)? {
            total += (0..edges.len()).map(|k| if sub >> k & 1 == 1 { p[edges[k]] } else { 1.0 - p[edges[k]] }).product::<f64>();
        }
    }
    Ok(total)
}

pub fn spin_measure_weight(graph: &Graph, model: &SpinModel, sigma: &[u32]) -> Result<f64> {
    model.validate(graph)?;
    if sigma.len() != graph.vertex_count() || sigma.iter().any(|&c| c >= model.q()) {
        return Err(Error::InvalidParameter("spin configuration does not fit the model".into()));
    }
    weight_unchecked(graph, model, sigma)
}

pub fn spin_measure(graph: &Graph, model: &SpinModel) -> Result<Measure> {
    model.validate(graph)?;
    let (n, q) = (graph.vertex_count(), model.q());
    Measure::try_from_fn(Space::Spins { vertices: n, q }, |i| weight_unchecked(graph, model, &digits(i, q, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{exact_distribution, tv_distance};

    #[test]
    fn ising_single_edge() {
        let g = Graph::single_edge();
        let j = 0.8f64;
        let d = exact_distribution(&spin_measure(&g, &SpinModel::Ising { j: vec![j] }).unwrap()).unwrap();
        let z = 2.0 * (j.exp() + (-j).exp());
        assert!((d.prob(0) - j.exp() / z).abs() < 1e-15);
        assert!((d.prob(1) - (-j).exp() / z).abs() < 1e-15);
    }

    #[test]
    fn xor_single_edge_ratio() {
        let g = Graph::single_edge();
        let j = 0.35f64;
        let d = exact_distribution(&spin_measure(&g, &SpinModel::Xor { j: vec![j] }).unwrap()).unwrap();
        let ratio = d.prob(0) / d.prob(1);
        assert!((ratio - ((2.0 * j).exp() + (-2.0 * j).exp()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn sources_with_empty_set_reduce_to_ising() {
        let g = Graph::triangle();
        let j = vec![0.2, 0.5, 0.9];
        let mu = exact_distribution(&spin_measure(&g, &SpinModel::Ising { j: j.clone() }).unwrap()).unwrap();
        let mua = exact_distribution(&spin_measure(&g, &SpinModel::IsingSources { j, sources: g.no_vertices() }).unwrap()).unwrap();
        assert!(tv_distance(&mu, &mua).unwrap() < 1e-15);
    }

    #[test]
    fn potts_two_colors_is_ising() {
        let g = Graph::complete(4);
        let j = vec![0.3, 0.1, 0.4, 0.6, 0.2, 0.5];
        let a = exact_distribution(&spin_measure(&g, &SpinModel::Ising { j: j.clone() }).unwrap()).unwrap();
        let b = exact_distribution(&spin_measure(&g, &SpinModel::Potts { j, q: 2 }).unwrap()).unwrap();
        assert!(tv_distance(&a, &b).unwrap() < 1e-15);
    }
}
