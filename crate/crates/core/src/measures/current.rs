use super::{edge_measure, exact_distribution, union_measure, Distribution, EdgeModel, Space};
use crate::error::{guard, Error, Result};
use crate::graph::{Graph, VertexSet};

/// Largest edge count for traced-current enumeration (3^|E| patterns).
pub const CURRENT_EDGE_GUARD: usize = 12;

pub(crate) fn vertex_masks(graph: &Graph) -> Result<Vec<u64>> {
    guard("vertices for mask arithmetic", graph.vertex_count() as u128, 64)?;
    Ok(graph.edges().iter().map(|&(u, v)| (1u64 << u) ^ (1u64 << v)).collect())
}

pub(crate) fn vertex_mask(set: &VertexSet) -> u64 {
    set.iter().fold(0, |m, v| m | 1 << v)
}

/// Law of the trace of a random current with sources A and couplings `j`.
/// Each edge's Poisson multiplicity is reduced to three classes (zero,
/// positive even, odd) with masses e^{-J}, e^{-J}(cosh J − 1), e^{-J} sinh J;
/// the odd class must have boundary A and the trace is the nonzero class.
pub fn traced_current_exact(graph: &Graph, sources: &VertexSet, j: &[f64]) -> Result<Distribution> {
    let len = graph.edge_count();
    guard("traced current edges", len as u128, CURRENT_EDGE_GUARD as u128)?;
    if sources.count() % 2 == 1 {
        return Err(Error::OddSourceSet(sources.count()));
    }
    if j.len() != len || j.iter().any(|&j| !(j >= 0.0 && j.is_finite())) {
        return Err(Error::InvalidParameter("couplings must be finite and nonnegative, one per edge".into()));
    }
    let masks = vertex_masks(graph)?;
    let target = vertex_mask(sources);
    let zero: f64 = j.iter().map(|&j| (-j).exp()).product();
    let odd_w: Vec<f64> = j.iter().map(|&j| j.sinh()).collect();
    let even_w: Vec<f64> = j.iter().map(|&j| j.cosh() - 1.0).collect();
    let full = (1u64 << len) - 1;
    let mut probs = vec![0.0; 1 << len];
    for odd in 0..=full {
        let boundary = (0..len).filter(|&e| odd >> e & 1 == 1).fold(0u64, |b, e| b ^ masks[e]);
        if boundary != target {
            continue;
        }
        let w_odd: f64 = (0..len).filter(|&e| odd >> e & 1 == 1).map(|e| odd_w[e]).product();
        let rest = full & !odd;
        let mut even = rest;
        loop {
            let w_even: f64 = (0..len).filter(|&e| even >> e & 1 == 1).map(|e| even_w[e]).product();
            probs[(odd | even) as usize] += zero * w_odd * w_even;
            if even == 0 {
                break;
            }
            even = (even - 1) & rest;
        }
    }
    Distribution::from_weights(Space::Edges { edges: len }, probs)
}

/// Trace of the sum of two independent currents with sources A and B:
/// ℓ^A_t ∪ ℓ^B_t ∪ ℙ_{t²}.
pub fn double_current_exact(graph: &Graph, a: &VertexSet, b: &VertexSet, t: &[f64]) -> Result<Distribution> {
    guard("double current edges", graph.edge_count() as u128, CURRENT_EDGE_GUARD as u128)?;
    let la = exact_distribution(&edge_measure(graph, &EdgeModel::loop_o1(t.to_vec(), a.clone()))?)?;
    let lb = exact_distribution(&edge_measure(graph, &EdgeModel::loop_o1(t.to_vec(), b.clone()))?)?;
    let sprinkle = exact_distribution(&edge_measure(graph, &EdgeModel::Bernoulli { p: t.iter().map(|t| t * t).collect() })?)?;
    union_measure(&union_measure(&la, &lb)?, &sprinkle)
}
