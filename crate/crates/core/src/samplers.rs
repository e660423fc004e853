//! Direct samplers and Markov chain kernels. Everything draws through
//! [`Randomness`], so the same code runs under a seeded generator or under
//! [`crate::rng::exact_outcomes`] for exact kernels.

use crate::chains::{sample_uniform_kernel, ChainQ};
use crate::error::{guard, Error, Result, ENUMERATION_GUARD};
use crate::gauge::{CellChainQ, CubicalComplex};
use crate::graph::{EdgeSet, Graph, VertexSet};
use crate::measures::{edge_measure, exact_distribution, EdgeModel, TableSampler, CURRENT_EDGE_GUARD};
use crate::rng::Randomness;
use rand::Rng;

/// Default cap on rejection proposals.
pub const REJECTION_CAP: u64 = 1_000_000;

pub fn sample_bernoulli<R: Randomness + ?Sized>(graph: &Graph, p: &[f64], rng: &mut R) -> EdgeSet {
    let mut omega = graph.no_edges();
    for e in 0..graph.edge_count() {
        if rng.bernoulli(p[e]) {
            omega.insert(e);
        }
    }
    omega
}

/// ω ∪ Bernoulli(p): each edge outside ω opens independently.
pub fn sprinkle<R: Randomness + ?Sized>(graph: &Graph, omega: &EdgeSet, p: &[f64], rng: &mut R) -> EdgeSet {
    let mut out = omega.clone();
    for e in 0..graph.edge_count() {
        if !omega.contains(e) && rng.bernoulli(p[e]) {
            out.insert(e);
        }
    }
    out
}

/// ω ∩ Bernoulli(p): each edge of ω is kept independently.
pub fn thin<R: Randomness + ?Sized>(omega: &EdgeSet, p: &[f64], rng: &mut R) -> EdgeSet {
    let mut out = omega.clone();
    for e in omega.iter() {
        if !rng.bernoulli(p[e]) {
            out.remove(e);
        }
    }
    out
}

/// Uniform even subgraph of ω: XOR of a uniformly random subset of the
/// fundamental-cycle basis.
pub fn sample_ueg<R: Randomness + ?Sized>(graph: &Graph, omega: &EdgeSet, rng: &mut R) -> EdgeSet {
    let mut out = graph.no_edges();
    for cycle in graph.cycle_space_basis(omega) {
        if rng.bernoulli(0.5) {
            out.symmetric_difference_with(&cycle);
        }
    }
    out
}

/// Uniform subgraph of ω with boundary A: a fixed witness shifted by a
/// uniform even subgraph.
pub fn sample_ug_sources<R: Randomness + ?Sized>(graph: &Graph, omega: &EdgeSet, sources: &VertexSet, rng: &mut R) -> Result<EdgeSet> {
    let gamma = graph.source_subgraph(omega, sources)?;
    Ok(gamma.symmetric_difference(&sample_ueg(graph, omega, rng)))
}

/// Independent uniform color per cluster of ω.
pub fn color_clusters<R: Randomness + ?Sized>(graph: &Graph, omega: &EdgeSet, q: u32, rng: &mut R) -> Vec<u32> {
    let (labels, k) = graph.cluster_labels(omega);
    let colors: Vec<u32> = (0..k).map(|_| rng.below(q)).collect();
    labels.into_iter().map(|l| colors[l]).collect()
}

/// Swendsen–Wang move for the q-Potts model: open satisfied edges with
/// probability p, then recolor clusters.
pub fn sw_step<R: Randomness + ?Sized>(graph: &Graph, p: &[f64], q: u32, sigma: &[u32], rng: &mut R) -> Vec<u32> {
    sw_pair(graph, p, q, sigma, rng).1
}

/// The intermediate bond configuration and the new coloring.
pub fn sw_pair<R: Randomness + ?Sized>(graph: &Graph, p: &[f64], q: u32, sigma: &[u32], rng: &mut R) -> (EdgeSet, Vec<u32>) {
    let mut omega = graph.no_edges();
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        if sigma[u] == sigma[v] && rng.bernoulli(p[e]) {
            omega.insert(e);
        }
    }
    let next = color_clusters(graph, &omega, q, rng);
    (omega, next)
}

/// Loop-cluster move for the q-flow measure: open supp(η) plus independent
/// x-bonds, then draw a uniform divergence-free coloring of the result.
pub fn loop_cluster_step<R: Randomness + ?Sized>(graph: &Graph, x: &[f64], eta: &ChainQ, rng: &mut R) -> ChainQ {
    loop_cluster_pair(graph, x, eta, rng).1
}

pub fn loop_cluster_pair<R: Randomness + ?Sized>(graph: &Graph, x: &[f64], eta: &ChainQ, rng: &mut R) -> (EdgeSet, ChainQ) {
    let omega = sprinkle(graph, &eta.support(), x, rng);
    let next = sample_uniform_kernel(graph, &omega, eta.q(), rng);
    (omega, next)
}

/// Loop-cluster move with sources, preserving ℓ^A_t on E_A:
/// ω = η ∪ ℙ_t, then a uniform subgraph of ω with boundary A.
pub fn loop_cluster_sources_step<R: Randomness + ?Sized>(
    graph: &Graph,
    t: &[f64],
    sources: &VertexSet,
    eta: &EdgeSet,
    rng: &mut R,
) -> Result<EdgeSet> {
    let omega = sprinkle(graph, eta, t, rng);
    sample_ug_sources(graph, &omega, sources, rng)
}

/// Divergence-free k-chains supported on the k-cells of ω, by enumeration.
pub fn cell_kernel(complex: &CubicalComplex, k: usize, q: u32, omega: &EdgeSet) -> Result<Vec<CellChainQ>> {
    let open: Vec<usize> = omega.iter().collect();
    let size = (q as u128).checked_pow(open.len() as u32).unwrap_or(u128::MAX);
    guard("cell kernel enumeration", size, ENUMERATION_GUARD)?;
    let len = complex.cell_count(k);
    let mut out = Vec::new();
    for idx in 0..size as usize {
        let mut eta = ChainQ::zero(q, len);
        let mut rest = idx;
        for &c in &open {
            eta.set(c, (rest % q as usize) as u32);
            rest /= q as usize;
        }
        if complex.boundary(k, &eta)?.is_zero() {
            out.push(eta);
        }
    }
    Ok(out)
}

/// Plaquette loop-cluster move: open supp(η) plus independent x-cells, then
/// a uniform divergence-free k-chain supported on the open cells.
pub fn plaquette_lc_step<R: Randomness + ?Sized>(
    complex: &CubicalComplex,
    k: usize,
    x: &[f64],
    eta: &CellChainQ,
    rng: &mut R,
) -> Result<CellChainQ> {
    Ok(plaquette_lc_pair(complex, k, x, eta, rng)?.1)
}

pub fn plaquette_lc_pair<R: Randomness + ?Sized>(
    complex: &CubicalComplex,
    k: usize,
    x: &[f64],
    eta: &CellChainQ,
    rng: &mut R,
) -> Result<(EdgeSet, CellChainQ)> {
    if !complex.boundary(k, eta)?.is_zero() {
        return Err(Error::NotDivergenceFree);
    }
    if x.len() != eta.len() {
        return Err(Error::SpaceMismatch);
    }
    let mut omega = eta.support();
    for c in 0..eta.len() {
        if !omega.contains(c) && rng.bernoulli(x[c]) {
            omega.insert(c);
        }
    }
    let next = if k == 1 {
        sample_uniform_kernel(&complex.to_graph()?, &omega, eta.q(), rng)
    } else {
        let kernel = cell_kernel(complex, k, eta.q(), &omega)?;
        kernel[rng.below(kernel.len() as u32) as usize].clone()
    };
    Ok((omega, next))
}

/// How ℓ^A is drawn inside the current samplers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopMethod {
    /// Exact table when |E| is within the enumeration guard, else MCMC.
    Auto,
    Exact,
    /// Loop-cluster chain on E_A with the given burn-in (None: 100·|E|).
    Mcmc { burn_in: Option<u64> },
}

enum LoopSource {
    Table(TableSampler),
    Chain { state: EdgeSet },
}

/// Draws from ℓ^A_t, exactly or by a stationary chain.
pub struct LoopSampler {
    graph: Graph,
    t: Vec<f64>,
    sources: VertexSet,
    source: LoopSource,
}

impl LoopSampler {
    pub fn new<R: Rng + ?Sized>(graph: &Graph, t: &[f64], sources: &VertexSet, method: LoopMethod, rng: &mut R) -> Result<Self> {
        if sources.count() % 2 == 1 {
            return Err(Error::OddSourceSet(sources.count()));
        }
        let exact = match method {
            LoopMethod::Auto => graph.edge_count() <= CURRENT_EDGE_GUARD,
            LoopMethod::Exact => true,
            LoopMethod::Mcmc { .. } => false,
        };
        let source = if exact {
            let table = exact_distribution(&edge_measure(graph, &EdgeModel::loop_o1(t.to_vec(), sources.clone()))?)?;
            LoopSource::Table(TableSampler::new(&table))
        } else {
            let mut state = graph.source_subgraph(&graph.all_edges(), sources)?;
            let burn_in = match method {
                LoopMethod::Mcmc { burn_in: Some(b) } => b,
                _ => 100 * graph.edge_count() as u64,
            };
            for _ in 0..burn_in {
                state = loop_cluster_sources_step(graph, t, sources, &state, rng)?;
            }
            LoopSource::Chain { state }
        };
        Ok(Self { graph: graph.clone(), t: t.to_vec(), sources: sources.clone(), source })
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> EdgeSet {
        let len = self.graph.edge_count();
        match &mut self.source {
            LoopSource::Table(table) => EdgeSet::from_mask(len, table.sample(rng) as u64),
            LoopSource::Chain { state } => {
                *state = loop_cluster_sources_step(&self.graph, &self.t, &self.sources, state, rng)
                    .expect("chain stays in F_A");
                state.clone()
            }
        }
    }
}

/// Trace of a random current with sources A: ℓ^A_t ∪ ℙ_{1−√(1−t²)} with
/// t = tanh J.
pub struct SingleCurrentSampler {
    loops: LoopSampler,
    sprinkle: Vec<f64>,
}

impl SingleCurrentSampler {
    pub fn new<R: Rng + ?Sized>(graph: &Graph, sources: &VertexSet, j: &[f64], method: LoopMethod, rng: &mut R) -> Result<Self> {
        let t: Vec<f64> = j.iter().map(|j| j.tanh()).collect();
        let sprinkle = j.iter().map(|&j| 1.0 - 1.0 / j.cosh()).collect();
        Ok(Self { loops: LoopSampler::new(graph, &t, sources, method, rng)?, sprinkle })
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> EdgeSet {
        let eta = self.loops.sample(rng);
        let graph = &self.loops.graph;
        sprinkle(graph, &eta, &self.sprinkle, rng)
    }
}

/// Trace of the sum of two independent currents with sources A and B.
pub struct DoubleCurrentSampler {
    first: SingleCurrentSampler,
    second: SingleCurrentSampler,
}

impl DoubleCurrentSampler {
    pub fn new<R: Rng + ?Sized>(graph: &Graph, a: &VertexSet, b: &VertexSet, j: &[f64], method: LoopMethod, rng: &mut R) -> Result<Self> {
        Ok(Self {
            first: SingleCurrentSampler::new(graph, a, j, method, rng)?,
            second: SingleCurrentSampler::new(graph, b, j, method, rng)?,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> EdgeSet {
        let a = self.first.sample(rng);
        a.union(&self.second.sample(rng))
    }
}

/// Bernoulli(p) conditioned on F_A by rejection.
pub fn sample_bernoulli_in_fa<R: Randomness + ?Sized>(
    graph: &Graph,
    p: &[f64],
    sources: &VertexSet,
    cap: u64,
    rng: &mut R,
) -> Result<EdgeSet> {
    for _ in 0..cap {
        let omega = sample_bernoulli(graph, p, rng);
        if graph.in_event_fa(&omega, sources)? {
            return Ok(omega);
        }
    }
    Err(Error::RejectionBudget(cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{chain_rng, exact_outcomes};

    #[test]
    fn bernoulli_extremes() {
        let g = Graph::complete(4);
        let mut rng = chain_rng(1, 0);
        assert!(sample_bernoulli(&g, &[0.0; 6], &mut rng).is_empty());
        assert_eq!(sample_bernoulli(&g, &[1.0; 6], &mut rng).count(), 6);
    }

    #[test]
    fn bernoulli_frequency() {
        let g = Graph::single_edge();
        let mut rng = chain_rng(2, 0);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| !sample_bernoulli(&g, &[0.5], &mut rng).is_empty()).count();
        assert!((hits as f64 / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn ueg_exact_laws() {
        let tree = Graph::path(4);
        let law = exact_outcomes(10, |r| sample_ueg(&tree, &tree.all_edges(), r)).unwrap();
        assert_eq!(law.len(), 1);
        let theta = Graph::theta();
        let law = exact_outcomes(10, |r| sample_ueg(&theta, &theta.all_edges(), r)).unwrap();
        assert_eq!(law.len(), 4);
        assert!(law.values().all(|&p| p == 0.25));
    }

    #[test]
    fn ug_sources_examples() {
        let p3 = Graph::path(3);
        let a = p3.vertex_set([0, 2]);
        let law = exact_outcomes(10, |r| sample_ug_sources(&p3, &p3.all_edges(), &a, r).unwrap()).unwrap();
        assert_eq!(law.len(), 1);
        assert_eq!(law.keys().next().unwrap().count(), 2);
        let c4 = Graph::cycle(4);
        let a = c4.vertex_set([0, 2]);
        let law = exact_outcomes(10, |r| sample_ug_sources(&c4, &c4.all_edges(), &a, r).unwrap()).unwrap();
        assert_eq!(law.len(), 2);
        assert!(law.keys().all(|w| w.count() == 2 && c4.boundary_gf2(w) == a));
        assert!(sample_ug_sources(&p3, &p3.no_edges(), &p3.vertex_set([0, 2]), &mut chain_rng(0, 0)).is_err());
    }

    #[test]
    fn color_cluster_laws() {
        let g = Graph::path(4);
        let mut omega = g.all_edges();
        omega.remove(1);
        let law = exact_outcomes(100, |r| color_clusters(&g, &omega, 3, r)).unwrap();
        assert_eq!(law.len(), 9);
        let law = exact_outcomes(100, |r| color_clusters(&g, &g.all_edges(), 2, r)).unwrap();
        assert_eq!(law.len(), 2);
    }

    #[test]
    fn sw_single_edge_agreement() {
        let g = Graph::single_edge();
        let law = exact_outcomes(100, |r| sw_step(&g, &[2.0 / 3.0], 2, &[0, 0], r)).unwrap();
        let agree: f64 = law.iter().filter(|(s, _)| s[0] == s[1]).map(|(_, p)| p).sum();
        assert!((agree - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn sw_at_zero_coupling_is_iid() {
        let g = Graph::path(3);
        let law = exact_outcomes(100, |r| sw_step(&g, &[0.0, 0.0], 2, &[1, 1, 1], r)).unwrap();
        assert_eq!(law.len(), 8);
        assert!(law.values().all(|&p| (p - 0.125).abs() < 1e-15));
    }

    #[test]
    fn single_current_edge_cases() {
        let g = Graph::single_edge();
        let mut rng = chain_rng(3, 0);
        let mut s = SingleCurrentSampler::new(&g, &g.vertex_set([0, 1]), &[0.4], LoopMethod::Auto, &mut rng).unwrap();
        assert!((0..1000).all(|_| s.sample(&mut rng).count() == 1));
    }

    #[test]
    fn mcmc_needs_realizable_sources() {
        let g = Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let mut rng = chain_rng(0, 0);
        let r = LoopSampler::new(&g, &[0.5, 0.5], &g.vertex_set([0, 2]), LoopMethod::Mcmc { burn_in: None }, &mut rng);
        assert!(matches!(r, Err(Error::NotInSourceEvent)));
    }
}
