mod common;

use common::{dyadic, small_graph};
use couplings::graph::Graph;
use couplings::measures::{
    edge_measure, exact_distribution, intersect_measure, traced_current_exact, tv_distance, union_measure, Distribution, EdgeModel,
    SubgraphFamily,
};
use proptest::prelude::*;

fn law(g: &Graph, model: EdgeModel) -> Distribution {
    exact_distribution(&edge_measure(g, &model).unwrap()).unwrap()
}

fn instance() -> impl Strategy<Value = (Graph, Vec<f64>)> {
    small_graph(5, 8).prop_flat_map(|g| {
        let len = g.edge_count();
        (Just(g), prop::collection::vec(dyadic(), len))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn loops_sprinkled_are_random_cluster((g, t) in instance()) {
        let loops = law(&g, EdgeModel::Loop { t: t.clone(), sources: g.no_vertices() });
        let p: Vec<f64> = t.iter().map(|t| 2.0 * t / (1.0 + t)).collect();
        let lhs = union_measure(&loops, &law(&g, EdgeModel::Bernoulli { p: t })).unwrap();
        let rhs = law(&g, EdgeModel::RandomCluster { p, q: 2.0 });
        prop_assert!(tv_distance(&lhs, &rhs).unwrap() < 1e-12);
    }

    #[test]
    fn traced_current_is_sprinkled_loops((g, t) in instance(), pair in (0usize..5, 0usize..5)) {
        let n = g.vertex_count();
        let a = if pair.0 % n == pair.1 % n { g.no_vertices() } else { g.vertex_set([pair.0 % n, pair.1 % n]) };
        let loops = edge_measure(&g, &EdgeModel::Loop { t: t.clone(), sources: a.clone() }).unwrap();
        prop_assume!(loops.weights.iter().any(|&w| w > 0.0));
        let j: Vec<f64> = t.iter().map(|t| t.atanh()).collect();
        let sprinkle: Vec<f64> = t.iter().map(|t| 1.0 - (1.0 - t * t).sqrt()).collect();
        let lhs = union_measure(&exact_distribution(&loops).unwrap(), &law(&g, EdgeModel::Bernoulli { p: sprinkle })).unwrap();
        prop_assert!(tv_distance(&lhs, &traced_current_exact(&g, &a, &j).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn union_and_intersection_algebra((g, t) in instance(), x in dyadic()) {
        let len = g.edge_count();
        let a = law(&g, EdgeModel::Bernoulli { p: t.clone() });
        let b = law(&g, EdgeModel::Family { family: SubgraphFamily::Forests, x: vec![x; len] });
        let c = law(&g, EdgeModel::RandomCluster { p: t, q: 3.0 });
        let empty = law(&g, EdgeModel::bernoulli_uniform(len, 0.0));
        let full = law(&g, EdgeModel::bernoulli_uniform(len, 1.0));
        for op in [union_measure, intersect_measure] {
            prop_assert!(tv_distance(&op(&a, &b).unwrap(), &op(&b, &a).unwrap()).unwrap() < 1e-14);
            let left = op(&op(&a, &b).unwrap(), &c).unwrap();
            let right = op(&a, &op(&b, &c).unwrap()).unwrap();
            prop_assert!(tv_distance(&left, &right).unwrap() < 1e-13);
        }
        prop_assert!(tv_distance(&union_measure(&b, &empty).unwrap(), &b).unwrap() < 1e-15);
        prop_assert!(tv_distance(&intersect_measure(&b, &full).unwrap(), &b).unwrap() < 1e-15);
    }
}
