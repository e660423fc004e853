mod common;

use common::small_graph;
use couplings::graph::{Coupling, EdgeParams, EdgeSet, Graph};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn subsets(omega: &EdgeSet) -> impl Iterator<Item = EdgeSet> + '_ {
    let mask = omega.to_mask();
    let len = omega.len();
    let mut sub = mask;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = EdgeSet::from_mask(len, sub);
        if sub == 0 {
            done = true;
        } else {
            sub = (sub - 1) & mask;
        }
        Some(out)
    })
}

fn with_omega() -> impl Strategy<Value = (Graph, EdgeSet)> {
    small_graph(6, 10).prop_flat_map(|g| {
        let len = g.edge_count();
        (Just(g), 0u64..1 << len).prop_map(move |(g, m)| (g, EdgeSet::from_mask(len, m)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn even_count_matches_brute_force((g, omega) in with_omega()) {
        let brute = subsets(&omega).filter(|f| g.boundary_gf2(f).is_empty()).count() as u128;
        prop_assert_eq!(g.even_subgraph_count(&omega), brute);
    }

    #[test]
    fn switching_principle_counts((g, omega) in with_omega(), picks in prop::collection::vec(any::<bool>(), 6)) {
        let a = g.vertex_set((0..g.vertex_count()).filter(|&v| picks[v]));
        let brute = subsets(&omega).filter(|f| g.boundary_gf2(f) == a).count() as u128;
        if a.count() % 2 == 0 {
            prop_assert_eq!(g.sources_count(&omega, &a).unwrap(), brute);
        } else {
            prop_assert_eq!(brute, 0);
        }
    }

    #[test]
    fn cycle_basis_spans_even_subgraphs((g, omega) in with_omega()) {
        let basis = g.cycle_space_basis(&omega);
        let mut span = BTreeSet::new();
        for pick in 0u64..1 << basis.len() {
            let mut f = g.no_edges();
            for (i, b) in basis.iter().enumerate() {
                if pick >> i & 1 == 1 {
                    f.symmetric_difference_with(b);
                }
            }
            span.insert(f.to_mask());
        }
        let even: BTreeSet<u64> = subsets(&omega).filter(|f| g.boundary_gf2(f).is_empty()).map(|f| f.to_mask()).collect();
        prop_assert_eq!(span, even);
    }

    #[test]
    fn parameter_conversion(j in 0.001f64..5.0) {
        let e = EdgeParams::from_coupling(Coupling::J(j)).unwrap();
        let t = j.tanh();
        prop_assert!((e.t - t).abs() < 1e-12);
        prop_assert!((e.p - (1.0 - (-2.0 * j).exp())).abs() < 1e-12);
        prop_assert!((e.p - 2.0 * t / (1.0 + t)).abs() < 1e-12);
    }
}
