use super::identities::*;
use super::{deconvolve_union, Deconvolution, IdentityRecord};
use crate::coupling::{CouplingRow, RowId, RowInput};
use crate::error::Result;
use crate::gauge::CubicalComplex;
use crate::graph::{Coupling, EdgeParams, Graph, PlanarDualPairing, VertexSet};
use crate::measures::{edge_measure, exact_distribution, tv_distance, union_measure, Distribution, EdgeModel, Space};
use crate::rng::{chain_rng, Randomness};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Dyadic value k/8 with k drawn uniformly from `lo..=hi`.
fn dyadic(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> f64 {
    (lo + rng.below(hi - lo + 1)) as f64 / 8.0
}

fn randomized(mut graph: Graph, rng: &mut ChaCha8Rng) -> Result<Graph> {
    let params = (0..graph.edge_count())
        .map(|_| EdgeParams::from_coupling(Coupling::T(dyadic(rng, 1, 7))))
        .collect::<Result<Vec<_>>>()?;
    graph.set_params(params);
    Ok(graph)
}

fn two_triangles() -> Graph {
    crate::coupling::two_triangles()
}

/// Runs every identity on a fixed family of small instances with dyadic
/// parameters drawn from `seed`.
pub fn run_suite(seed: u64) -> Result<Vec<IdentityRecord>> {
    let mut rng = chain_rng(seed, 0);
    let rng = &mut rng;
    let mut out = Vec::new();
    let vs = |g: &Graph, v: &[usize]| -> VertexSet { g.vertex_set(v.iter().copied()) };

    let k4 = randomized(Graph::complete(4), rng)?;
    let c4 = randomized(Graph::cycle(4), rng)?;
    let tri = randomized(Graph::triangle(), rng)?;
    let theta = randomized(Graph::theta(), rng)?;
    let hex = randomized(Graph::hex_patch(1, 1), rng)?;

    for (g, a) in [(&tri, vec![0, 1]), (&c4, vec![0, 2]), (&k4, vec![0, 1]), (&k4, vec![0, 1, 2, 3]), (&theta, vec![0, 1])] {
        out.push(switching_principle(g, &vs(g, &a))?);
    }
    for g in [&tri, &c4, &k4, &theta, &hex] {
        out.push(even_count(g)?);
    }
    for q in 2..=5 {
        for g in [&tri, &theta, &k4] {
            out.push(kernel_count_identity(g, q)?);
        }
    }
    for (g, a) in [(&k4, vec![]), (&k4, vec![0, 1]), (&c4, vec![1, 3]), (&hex, vec![])] {
        out.push(random_cluster_identity(g, &vs(g, &a))?);
    }
    for (g, a) in [(&k4, vec![]), (&k4, vec![0, 1]), (&theta, vec![0, 1]), (&c4, vec![0, 2])] {
        out.push(single_current(g, &vs(g, &a))?);
    }
    for (g, a, b) in [(&k4, vec![], vec![]), (&k4, vec![0, 1], vec![1, 2]), (&k4, vec![0, 1], vec![0, 1]), (&c4, vec![0, 2], vec![])] {
        out.push(double_current(g, &vs(g, &a), &vs(g, &b))?);
        out.push(lis_formula(g, &vs(g, &a), &vs(g, &b))?);
    }
    for (g, a) in [(&k4, vec![]), (&k4, vec![0, 3]), (&theta, vec![0, 1])] {
        let x: Vec<f64> = (0..g.edge_count()).map(|_| dyadic(rng, 1, 7)).collect();
        let p: Vec<f64> = (0..g.edge_count()).map(|_| dyadic(rng, 1, 7)).collect();
        out.push(reweighting(g, &vs(g, &a), &x, &p)?);
    }
    for g in [&tri, &c4, &k4] {
        out.push(xor_partition(g)?);
    }

    let square_box = CubicalComplex::box_complex(&[2, 2])?;
    let torus = CubicalComplex::torus_complex(2, 2)?;
    let cube = CubicalComplex::box_complex(&[1, 1, 1])?;
    for (c, k, q) in [(&square_box, 1, 2), (&square_box, 2, 2), (&square_box, 2, 3), (&torus, 1, 2), (&torus, 1, 3), (&torus, 2, 2), (&torus, 2, 3), (&cube, 2, 2), (&cube, 3, 3)] {
        out.push(rank_nullity(c, k, q)?);
    }
    for (c, k, q) in [(&torus, 1, 2), (&torus, 1, 3), (&torus, 2, 2), (&torus, 2, 3), (&square_box, 2, 3), (&cube, 2, 2), (&cube, 3, 3)] {
        out.push(plaquette_equivalence(c, k, q, dyadic(rng, 1, 7))?);
    }
    for (c, k, q) in [(&square_box, 1, 2), (&square_box, 1, 3), (&square_box, 2, 2), (&torus, 1, 2), (&torus, 1, 3), (&torus, 2, 2)] {
        out.push(domain_wall_pushforward(c, k, q, dyadic(rng, 1, 7))?);
    }

    let square = Graph::cycle(4);
    let grid = Graph::grid(3, 3);
    for (g, pairing) in [(&square, PlanarDualPairing::cycle(&square)?), (&grid, PlanarDualPairing::planar_lattice(&grid)?)] {
        let x: Vec<f64> = (0..g.edge_count()).map(|_| dyadic(rng, 9, 32)).collect();
        out.push(antiferro_dual(g, &pairing, &x)?);
    }

    let pair = two_triangles();
    for (g, n, m) in [(&c4, 2.0, 1.0), (&theta, 1.5, 0.5), (&pair, 3.0, 1.0), (&pair, 2.0, 2.0), (&hex, 2.0, 1.0)] {
        let x: Vec<f64> = (0..g.edge_count()).map(|_| dyadic(rng, 1, 7)).collect();
        out.push(loop_on_split(g, n, m, &x)?);
    }
    Ok(out)
}

/// Recovery of Σ from Ω = Σ ∪ ℙ_r by inverting the sprinkling.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SprinklingReport {
    pub label: String,
    /// TV between the recovered law and the predicted Σ-law.
    pub recovered: f64,
    /// TV between (recovered ∪ ℙ_r) and Ω.
    pub recomposed: f64,
}

impl SprinklingReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.recovered < tolerance && self.recomposed < tolerance
    }
}

fn recover(label: String, omega: &Distribution, sigma: &Distribution, rate: &[f64], graph: &Graph) -> Result<SprinklingReport> {
    let gamma = match deconvolve_union(omega, rate)? {
        Deconvolution::Solved(d) => d,
        Deconvolution::Infeasible { .. } => return Ok(SprinklingReport { label, recovered: 1.0, recomposed: 1.0 }),
    };
    let sprinkle = exact_distribution(&edge_measure(graph, &EdgeModel::Bernoulli { p: rate.to_vec() })?)?;
    Ok(SprinklingReport {
        label,
        recovered: tv_distance(&gamma, sigma)?,
        recomposed: tv_distance(&union_measure(&gamma, &sprinkle)?, omega)?,
    })
}

/// Inverts φ_{2t/(1+t)} = ℓ_t ∪ ℙ_t on K4, then the Ω-marginal of every
/// sprinkling row of the registry.
pub fn sprinkling_recovery(seed: u64) -> Result<Vec<SprinklingReport>> {
    let mut rng = chain_rng(seed, 1);
    let g = randomized(Graph::complete(4), &mut rng)?;
    let t = g.t_values();
    let rc = exact_distribution(&edge_measure(&g, &EdgeModel::RandomCluster { p: g.p_values(), q: 2.0 })?)?;
    let loops = exact_distribution(&edge_measure(&g, &EdgeModel::Loop { t: t.clone(), sources: g.no_vertices() })?)?;
    let mut out = vec![recover("random-cluster to loop O(1) on K4".into(), &rc, &loops, &t, &g)?];
    for id in [RowId::LoopClusterIsing, RowId::LoopClusterSources, RowId::ConditionalPercolation, RowId::FlowLoopCluster] {
        let input = RowInput::designated(id)?;
        let row = CouplingRow::build(id, &input)?;
        let len = input.graph.edge_count();
        let rate = match id {
            RowId::LoopClusterIsing | RowId::LoopClusterSources => input.graph.t_values(),
            _ => vec![input.x; len],
        };
        let sigma = row.predicted_sigma()?;
        let sigma = match sigma.space {
            Space::Chains { cells, q } => sigma.pushforward(Space::Edges { edges: len }, |i| crate::chains::ChainQ::from_index(q, cells, i).support().to_mask() as usize)?,
            _ => sigma,
        };
        out.push(recover(format!("row {id}: {}", row.instance), &row.predicted_omega()?, &sigma, &rate, &input.graph)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let records = run_suite(7).unwrap();
        for r in &records {
            assert!(r.pass(), "{r:?}");
        }
        let names: std::collections::BTreeSet<&str> = records.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names.len(), 14);
    }

    #[test]
    fn sprinkling_rows_recover() {
        for r in sprinkling_recovery(7).unwrap() {
            assert!(r.passes(1e-10), "{r:?}");
        }
    }
}
