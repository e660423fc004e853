use super::{Distribution, Space};
use crate::error::{Error, Result};

fn combine(a: &Distribution, b: &Distribution, op: impl Fn(usize, usize) -> usize) -> Result<Distribution> {
    if a.space != b.space || !matches!(a.space, Space::Edges { .. }) {
        return Err(Error::SpaceMismatch);
    }
    let mut probs = vec![0.0; a.probs.len()];
    let right: Vec<(usize, f64)> = b.support().collect();
    for (i, p) in a.support() {
        for &(k, r) in &right {
            probs[op(i, k)] += p * r;
        }
    }
    Ok(Distribution { space: a.space, probs })
}

/// Law of the edgewise OR of independent samples.
pub fn union_measure(a: &Distribution, b: &Distribution) -> Result<Distribution> {
    combine(a, b, |i, k| i | k)
}

/// Law of the edgewise AND of independent samples.
pub fn intersect_measure(a: &Distribution, b: &Distribution) -> Result<Distribution> {
    combine(a, b, |i, k| i & k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::measures::{edge_measure, exact_distribution, tv_distance, EdgeModel};

    fn bern(len: usize, p: f64) -> Distribution {
        let g = Graph::path(len + 1);
        exact_distribution(&edge_measure(&g, &EdgeModel::bernoulli_uniform(len, p)).unwrap()).unwrap()
    }

    #[test]
    fn bernoulli_closure() {
        let (p, r) = (0.3, 0.55);
        let u = union_measure(&bern(3, p), &bern(3, r)).unwrap();
        assert!(tv_distance(&u, &bern(3, p + r - p * r)).unwrap() < 1e-15);
        let i = intersect_measure(&bern(3, p), &bern(3, r)).unwrap();
        assert!(tv_distance(&i, &bern(3, p * r)).unwrap() < 1e-15);
    }

    #[test]
    fn identities() {
        let s = Space::Edges { edges: 3 };
        let mu = bern(3, 0.3);
        let empty = Distribution::point_mass(s, 0).unwrap();
        let full = Distribution::point_mass(s, 7).unwrap();
        assert_eq!(union_measure(&mu, &empty).unwrap(), mu);
        assert_eq!(intersect_measure(&mu, &full).unwrap(), mu);
    }

    #[test]
    fn spin_spaces_rejected() {
        let s = Distribution::point_mass(Space::Spins { vertices: 2, q: 2 }, 0).unwrap();
        assert!(union_measure(&s, &s).is_err());
    }
}
