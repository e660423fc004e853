use super::stats::Proportion;
use crate::chains::ChainQ;
use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph};
use crate::rng::Randomness;
use crate::samplers::loop_cluster_pair;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Lattice {
    /// [−n, n]^d.
    Box,
    /// Z^d / 2nZ^d.
    Torus,
}

impl Lattice {
    pub fn build(self, d: usize, n: usize) -> Graph {
        match self {
            Lattice::Box => Graph::box_lattice(d, n),
            Lattice::Torus => Graph::torus(d, n),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Lattice::Box => "box",
            Lattice::Torus => "torus",
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Lattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box" => Ok(Lattice::Box),
            "torus" => Ok(Lattice::Torus),
            other => Err(Error::InvalidParameter(format!("lattice `{other}` (expected box or torus)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayPoint {
    pub n: usize,
    /// supp(η) connects the origin to the sphere of radius n − 1.
    pub crossing: Proportion,
    /// The same event for the coupled ω, which dominates it.
    pub cluster_crossing: Proportion,
    pub samples: u64,
    /// Samples with supp(η) ⊂ ω.
    pub contained: u64,
    /// ω wraps in direction 0, recorded on the torus only.
    pub wraps: Option<Proportion>,
}

/// ℓ^∞ norm of the coordinates, measured periodically on a torus.
fn radius(graph: &Graph, v: usize) -> i64 {
    let geo = graph.geometry().expect("lattice builders carry geometry");
    geo.coords[v]
        .iter()
        .map(|&c| match geo.period {
            Some(l) => c.rem_euclid(l).min(l - c.rem_euclid(l)),
            None => c.abs(),
        })
        .max()
        .unwrap_or(0)
}

/// Loop-cluster estimate of ℓ^q_x[0 ↔ ∂B_{n−1}] from `samples` sweeps
/// after `burn_in`, with the containment supp(η) ⊂ ω checked every sweep.
pub fn decay_point<R: Randomness + ?Sized>(lattice: Lattice, d: usize, n: usize, q: u32, x: f64, samples: u64, burn_in: u64, rng: &mut R) -> Result<DecayPoint> {
    if n < 2 || d == 0 || q < 2 || !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!("need d >= 1, n >= 2, q >= 2, x in (0,1); got d={d}, n={n}, q={q}, x={x}")));
    }
    let graph = lattice.build(d, n);
    let len = graph.edge_count();
    let origin = (0..graph.vertex_count()).find(|&v| radius(&graph, v) == 0).expect("origin exists");
    let sphere: Vec<usize> = (0..graph.vertex_count()).filter(|&v| radius(&graph, v) == n as i64 - 1).collect();
    let xs = vec![x; len];
    let mut eta = ChainQ::zero(q, len);
    for _ in 0..burn_in {
        eta = loop_cluster_pair(&graph, &xs, &eta, rng).1;
    }
    let periodic = lattice == Lattice::Torus;
    let (mut hits, mut cluster_hits, mut contained, mut wraps) = (0u64, 0u64, 0u64, 0u64);
    for _ in 0..samples {
        let (omega, next) = loop_cluster_pair(&graph, &xs, &eta, rng);
        eta = next;
        let support = eta.support();
        contained += u64::from(support.is_subset(&omega));
        let reaches = |open: &EdgeSet| {
            let (labels, _) = graph.cluster_labels(open);
            sphere.iter().any(|&v| labels[v] == labels[origin])
        };
        hits += u64::from(reaches(&support));
        cluster_hits += u64::from(reaches(&omega));
        if periodic {
            wraps += u64::from(graph.winding_cycle(&omega, Some(0))?.is_some());
        }
    }
    Ok(DecayPoint { n, crossing: Proportion::new(hits, samples), cluster_crossing: Proportion::new(cluster_hits, samples), samples, contained, wraps: periodic.then(|| Proportion::new(wraps, samples)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chain_rng;

    #[test]
    fn subcritical_crossing_decays() {
        let mut rng = chain_rng(2, 0);
        let small = decay_point(Lattice::Box, 2, 2, 2, 0.3, 4000, 100, &mut rng).unwrap();
        let large = decay_point(Lattice::Box, 2, 5, 2, 0.3, 4000, 100, &mut rng).unwrap();
        assert_eq!(small.contained, small.samples);
        assert_eq!(large.contained, large.samples);
        assert!(large.crossing.estimate < small.crossing.estimate, "{small:?} {large:?}");
        assert!(small.cluster_crossing.successes >= small.crossing.successes);
    }

    #[test]
    fn torus_radius_is_periodic() {
        let g = Graph::torus(2, 3);
        let far = (0..g.vertex_count()).map(|v| radius(&g, v)).max().unwrap();
        assert_eq!(far, 3);
    }

    #[test]
    fn lattice_names_round_trip() {
        for l in [Lattice::Box, Lattice::Torus] {
            assert_eq!(l.as_str().parse::<Lattice>().unwrap(), l);
        }
        assert!("cube".parse::<Lattice>().is_err());
    }
}
