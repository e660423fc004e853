mod common;

use couplings::chains::ChainQ;
use couplings::coupling::with_couplings;
use couplings::experiments::arboreal::forest_sweep;
use couplings::gauge::CubicalComplex;
use couplings::graph::{EdgeSet, Graph};
use couplings::measures::{
    digits, double_current_exact, edge_measure, exact_distribution, qflow_measure, spin_measure, tv_distance, undigits, Distribution, EdgeModel,
    Measure, Space, SpinModel, SubgraphFamily,
};
use couplings::rng::{chain_rng, exact_outcomes, Branching};
use couplings::samplers::{loop_cluster_pair, loop_cluster_sources_step, loop_cluster_step, plaquette_lc_step, sw_step};

const J: [f64; 6] = [0.3, 0.55, 0.4, 0.7, 0.25, 0.5];

/// max_y |(πK)(y) − π(y)| with K built by exhausting the step's draws.
fn defect(pi: &Distribution, step: impl Fn(usize, &mut Branching) -> usize) -> f64 {
    let mut next = vec![0.0; pi.probs.len()];
    for (s, w) in pi.support() {
        for (t, k) in exact_outcomes(10_000_000, |r| step(s, r)).unwrap() {
            next[t] += w * k;
        }
    }
    next.iter().zip(&pi.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn normalized(m: Measure) -> Distribution {
    exact_distribution(&m).unwrap()
}

#[test]
fn swendsen_wang_fixes_potts() {
    for (g, q) in [(Graph::triangle(), 2), (Graph::triangle(), 3), (Graph::cycle(4), 2), (Graph::cycle(4), 3)] {
        let g = with_couplings(g, &J).unwrap();
        let n = g.vertex_count();
        let pi = normalized(spin_measure(&g, &SpinModel::Potts { j: g.j_values(), q }).unwrap());
        let p = g.p_values();
        let d = defect(&pi, |s, r| undigits(&sw_step(&g, &p, q, &digits(s, q, n), r), q));
        assert!(d < 1e-12, "q={q}: {d}");
    }
}

#[test]
fn loop_cluster_fixes_flow_measure() {
    for (g, q) in [(Graph::theta(), 2), (Graph::theta(), 3), (Graph::complete(4), 2), (Graph::complete(4), 3)] {
        let len = g.edge_count();
        let x: Vec<f64> = J[..len].iter().map(|j| j / 2.0).collect();
        let pi = normalized(qflow_measure(&g, q, &x).unwrap());
        let d = defect(&pi, |s, r| loop_cluster_step(&g, &x, &ChainQ::from_index(q, len, s), r).index());
        assert!(d < 1e-12, "q={q}: {d}");
    }
}

fn cell_flow_law(c: &CubicalComplex, k: usize, q: u32, x: &[f64]) -> Distribution {
    let cells = c.cell_count(k);
    let space = Space::Chains { cells, q };
    let w = (0..space.size().unwrap()).map(|i| c.q_flow_cell_weight(k, x, &ChainQ::from_index(q, cells, i)).unwrap_or(0.0)).collect();
    Distribution::from_weights(space, w).unwrap()
}

#[test]
fn plaquette_loop_cluster_fixes_cell_flows() {
    let square = CubicalComplex::single_square();
    let cube = CubicalComplex::box_complex(&[1, 1, 1]).unwrap();
    for (c, k, q) in [(&square, 1, 3), (&square, 2, 3), (&cube, 2, 3), (&cube, 2, 2)] {
        let cells = c.cell_count(k);
        let x: Vec<f64> = (0..cells).map(|i| 0.2 + 0.1 * (i % 4) as f64).collect();
        let pi = cell_flow_law(c, k, q, &x);
        let d = defect(&pi, |s, r| plaquette_lc_step(c, k, &x, &ChainQ::from_index(q, cells, s), r).unwrap().index());
        assert!(d < 1e-12, "k={k}, q={q}: {d}");
    }
}

#[test]
fn loop_cluster_with_sources_fixes_loops() {
    let g = with_couplings(Graph::complete(4), &J).unwrap();
    let t = g.t_values();
    for a in [g.no_vertices(), g.vertex_set([0, 1]), g.vertex_set([0, 1, 2, 3])] {
        let pi = normalized(edge_measure(&g, &EdgeModel::Loop { t: t.clone(), sources: a.clone() }).unwrap());
        let d = defect(&pi, |s, r| loop_cluster_sources_step(&g, &t, &a, &EdgeSet::from_mask(6, s as u64), r).unwrap().to_mask() as usize);
        assert!(d < 1e-12, "{d}");
    }
}

#[test]
fn forest_heat_bath_fixes_arboreal_gas() {
    for g in [Graph::triangle(), Graph::cycle(4), Graph::theta()] {
        let len = g.edge_count();
        let pi = normalized(edge_measure(&g, &EdgeModel::Family { family: SubgraphFamily::Forests, x: vec![1.75; len] }).unwrap());
        let d = defect(&pi, |s, r| {
            let mut f = EdgeSet::from_mask(len, s as u64);
            forest_sweep(&g, 1.75, &mut f, r);
            f.to_mask() as usize
        });
        assert!(d < 1e-12, "{d}");
    }
}

#[test]
fn flow_support_stays_inside_clusters() {
    let g = Graph::torus(2, 3);
    let x = vec![0.45; g.edge_count()];
    let mut rng = chain_rng(5, 0);
    let mut eta = ChainQ::zero(3, g.edge_count());
    for _ in 0..2000 {
        let (omega, next) = loop_cluster_pair(&g, &x, &eta, &mut rng);
        assert!(next.support().is_subset(&omega));
        assert!(eta.support().is_subset(&omega));
        eta = next;
    }
}

#[test]
fn trajectories_repeat_bit_for_bit() {
    let g = Graph::torus(2, 2);
    let x = vec![0.4; g.edge_count()];
    let run = || {
        let mut rng = chain_rng(123, 4);
        let mut eta = ChainQ::zero(3, g.edge_count());
        (0..500)
            .map(|_| {
                eta = loop_cluster_step(&g, &x, &eta, &mut rng);
                eta.values().to_vec()
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn uniform_even_subgraph_of_double_currents_is_loops() {
    let g = with_couplings(Graph::complete(4), &J).unwrap();
    let t = g.t_values();
    let loops = normalized(edge_measure(&g, &EdgeModel::Loop { t: t.clone(), sources: g.no_vertices() }).unwrap());
    let even: Vec<bool> = (0..64u64).map(|m| g.boundary_gf2(&EdgeSet::from_mask(6, m)).is_empty()).collect();
    for picks in 0u32..16 {
        let a = g.vertex_set((0..4).filter(|v| picks >> v & 1 == 1));
        if a.count() % 2 == 1 {
            continue;
        }
        let dc = double_current_exact(&g, &g.no_vertices(), &a, &t).unwrap();
        let mut pushed = vec![0.0; 64];
        for (omega, w) in dc.support() {
            let below: Vec<usize> = (0..64).filter(|&m| even[m] && m & omega == m).collect();
            for m in &below {
                pushed[*m] += w / below.len() as f64;
            }
        }
        let pushed = Distribution::from_weights(dc.space, pushed).unwrap();
        assert!(tv_distance(&pushed, &loops).unwrap() < 1e-12, "A = {picks:04b}");
    }
}
