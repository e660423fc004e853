use crate::coupling::{CouplingRow, RowId, RowInput};
use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph};
use crate::measures::{edge_measure, exact_distribution, intersect_measure, tv_distance, Distribution, EdgeModel, SubgraphFamily};
use crate::rng::Randomness;
use crate::samplers::thin;
use serde::Serialize;
use std::collections::VecDeque;

/// Retention rate p = 1 − ε/β for the intersected forest.
pub fn arboreal_retention(beta: f64, epsilon: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) || !(epsilon > 0.0 && epsilon <= 1.0) || epsilon >= beta {
        return Err(Error::InvalidParameter(format!("need beta > 0, epsilon in (0,1], epsilon < beta; got beta={beta}, epsilon={epsilon}")));
    }
    Ok(1.0 - epsilon / beta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArborealExact {
    pub beta: f64,
    pub epsilon: f64,
    pub p: f64,
    /// Worst TV of the upward registry row built on this graph.
    pub row_worst_tv: f64,
    /// TV between the arboreal gas and the mixture of completions of
    /// 𝒜_β ∩ ℙ_p by an ε/(1+ε) forest extension.
    pub recomposition_tv: f64,
}

/// Exact recomposition of 𝒜_β from 𝒜_β ∩ ℙ_p on a small graph.
pub fn arboreal_exact(graph: &Graph, beta: f64, epsilon: f64) -> Result<ArborealExact> {
    let p = arboreal_retention(beta, epsilon)?;
    let len = graph.edge_count();
    let forests = exact_distribution(&edge_measure(graph, &EdgeModel::Family { family: SubgraphFamily::Forests, x: vec![beta; len] })?)?;
    let thinned = intersect_measure(&forests, &exact_distribution(&edge_measure(graph, &EdgeModel::Bernoulli { p: vec![p; len] })?)?)?;
    let extend = epsilon / (1.0 + epsilon);
    let is_forest: Vec<bool> = (0..forests.probs.len()).map(|m| SubgraphFamily::Forests.contains(graph, &EdgeSet::from_mask(len, m as u64))).collect();
    let mut mixture = vec![0.0; forests.probs.len()];
    for (omega, weight) in thinned.support() {
        let completion: Vec<f64> = (0..mixture.len())
            .map(|eta| {
                if is_forest[eta] && eta & omega == omega {
                    let added = (eta & !omega).count_ones() as i32;
                    extend.powi(added) * (1.0 - extend).powi((len - eta.count_ones() as usize) as i32)
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = completion.iter().sum();
        for (eta, c) in completion.into_iter().enumerate() {
            mixture[eta] += weight * c / total;
        }
    }
    let mixture = Distribution::from_weights(forests.space, mixture)?;
    let input = RowInput { graph: graph.clone(), family: SubgraphFamily::Forests, x: beta, p, ..RowInput::designated(RowId::Upward)? };
    let row = CouplingRow::build(RowId::Upward, &input)?.verify()?;
    Ok(ArborealExact { beta, epsilon, p, row_worst_tv: row.worst(), recomposition_tv: tv_distance(&mixture, &forests)? })
}

fn adjacency(graph: &Graph, omega: &EdgeSet) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); graph.vertex_count()];
    for e in omega.iter() {
        let (u, v) = graph.endpoints(e);
        adj[u].push(v);
        adj[v].push(u);
    }
    adj
}

/// BFS distances from `from` (usize::MAX where unreachable).
fn distances(adj: &[Vec<usize>], from: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Heat-bath sweep over the edges in index order: an edge closing a cycle
/// stays closed, any other is open with probability β/(1+β).
pub fn forest_sweep<R: Randomness + ?Sized>(graph: &Graph, beta: f64, forest: &mut EdgeSet, rng: &mut R) {
    let open = beta / (1.0 + beta);
    for e in 0..graph.edge_count() {
        forest.remove(e);
        let (u, v) = graph.endpoints(e);
        let joined = distances(&adjacency(graph, forest), u)[v] != usize::MAX;
        if !joined && rng.bernoulli(open) {
            forest.insert(e);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceRow {
    pub distance: usize,
    /// Sampled (configuration, pair) combinations at this distance.
    pub pairs: u64,
    /// Frequency of v ↔ w in the thinned forest.
    pub connected: f64,
    /// Mean of p^{tree distance} 1[v ↔ w in the forest], the conditional
    /// connection probability given the forest.
    pub conditional: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArborealReport {
    pub beta: f64,
    pub epsilon: f64,
    pub p: f64,
    pub samples: u64,
    pub pairs_checked: u64,
    /// Per-sample failures of p^{tree distance} ≤ p^{dist}, or connections
    /// in the thinned forest absent from the forest.
    pub violations: u64,
    pub by_distance: Vec<DistanceRow>,
}

/// Samples forests by heat-bath sweeps, thins each sample at rate p and
/// checks the two-point bound configuration by configuration.
pub fn run_arboreal<R: Randomness + ?Sized>(graph: &Graph, beta: f64, epsilon: f64, samples: u64, burn_in: u64, rng: &mut R) -> Result<ArborealReport> {
    let p = arboreal_retention(beta, epsilon)?;
    let n = graph.vertex_count();
    let full = adjacency(graph, &graph.all_edges());
    let graph_dist: Vec<Vec<usize>> = (0..n).map(|v| distances(&full, v)).collect();
    let max_dist = graph_dist.iter().flatten().filter(|&&d| d != usize::MAX).copied().max().unwrap_or(0);
    let mut pairs = vec![0u64; max_dist + 1];
    let mut connected = vec![0u64; max_dist + 1];
    let mut conditional = vec![0f64; max_dist + 1];
    let mut forest = graph.no_edges();
    for _ in 0..burn_in {
        forest_sweep(graph, beta, &mut forest, rng);
    }
    let mut report = ArborealReport { beta, epsilon, p, samples, pairs_checked: 0, violations: 0, by_distance: Vec::new() };
    let ps = vec![p; graph.edge_count()];
    for _ in 0..samples {
        forest_sweep(graph, beta, &mut forest, rng);
        let kept = thin(&forest, &ps, rng);
        let tree = adjacency(graph, &forest);
        let (labels, _) = graph.cluster_labels(&kept);
        for v in 0..n {
            let tree_dist = distances(&tree, v);
            for w in v + 1..n {
                let d = graph_dist[v][w];
                if d == usize::MAX {
                    continue;
                }
                report.pairs_checked += 1;
                pairs[d] += 1;
                let linked = labels[v] == labels[w];
                connected[d] += u64::from(linked);
                if tree_dist[w] != usize::MAX {
                    let prob = p.powi(tree_dist[w] as i32);
                    conditional[d] += prob;
                    if tree_dist[w] < d {
                        report.violations += 1;
                    }
                } else if linked {
                    report.violations += 1;
                }
            }
        }
    }
    report.by_distance = (1..=max_dist)
        .filter(|&d| pairs[d] > 0)
        .map(|d| DistanceRow {
            distance: d,
            pairs: pairs[d],
            connected: connected[d] as f64 / pairs[d] as f64,
            conditional: conditional[d] / pairs[d] as f64,
            bound: p.powi(d as i32),
        })
        .collect();
    Ok(report)
}
