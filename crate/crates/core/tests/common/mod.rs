#![allow(dead_code)]

use couplings::graph::Graph;
use couplings::measures::{Distribution, Space};
use proptest::prelude::*;
use std::collections::HashMap;

/// Normalized histogram of `n` draws.
pub fn empirical(space: Space, n: u64, mut draw: impl FnMut() -> usize) -> Distribution {
    let mut counts = vec![0.0; space.size().unwrap()];
    for _ in 0..n {
        counts[draw()] += 1.0;
    }
    Distribution::from_weights(space, counts).unwrap()
}

pub fn from_outcomes(space: Space, law: HashMap<usize, f64>) -> Distribution {
    let mut w = vec![0.0; space.size().unwrap()];
    for (i, p) in law {
        w[i] += p;
    }
    Distribution::from_weights(space, w).unwrap()
}

/// Uniform law on the listed configurations.
pub fn uniform_on(space: Space, members: impl IntoIterator<Item = usize>) -> Distribution {
    let mut w = vec![0.0; space.size().unwrap()];
    for m in members {
        w[m] = 1.0;
    }
    Distribution::from_weights(space, w).unwrap()
}

/// Loopless multigraphs on up to `max_v` vertices with 1..=`max_e` edges.
pub fn small_graph(max_v: usize, max_e: usize) -> impl Strategy<Value = Graph> {
    (2..=max_v).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n - 1), 1..=max_e).prop_map(move |pairs| {
            let edges = pairs.into_iter().map(|(u, v)| if v >= u { (u, v + 1) } else { (u, v) }).collect();
            Graph::new(n, edges).unwrap()
        })
    })
}

/// Dyadic value k/8 with k in 1..=7.
pub fn dyadic() -> impl Strategy<Value = f64> {
    (1u32..=7).prop_map(|k| k as f64 / 8.0)
}
