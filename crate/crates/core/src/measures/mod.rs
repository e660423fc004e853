//! Weight functions of the models, exhaustive tables, and table algebra.

mod current;
mod edge;
mod ops;
mod spin;

pub use current::{double_current_exact, traced_current_exact, CURRENT_EDGE_GUARD};
pub use edge::{edge_measure, edge_measure_weight, loop_components, qflow_measure, qflow_weight, EdgeModel, SubgraphFamily};
pub use ops::{intersect_measure, union_measure};
pub use spin::{satisfied_edges, spin_measure, spin_measure_weight, SpinModel};

use crate::error::{guard, Error, Result, ENUMERATION_GUARD};
use crate::rng::Randomness;
use rand::Rng;

/// Configuration space of a finite measure. Configurations are indexed:
/// edge sets by bitmask, spins and chains as base-q numbers with element 0
/// the least significant digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Edges { edges: usize },
    Spins { vertices: usize, q: u32 },
    Chains { cells: usize, q: u32 },
}

impl Space {
    pub fn size(&self) -> Option<usize> {
        match *self {
            Space::Edges { edges } => 1usize.checked_shl(edges as u32).filter(|_| edges < usize::BITS as usize),
            Space::Spins { vertices: n, q } | Space::Chains { cells: n, q } => (q as usize).checked_pow(n as u32),
        }
    }

    pub fn guarded_size(&self, limit: u128) -> Result<usize> {
        let size = self.size().ok_or(Error::SizeGuard { what: "configuration space", size: u128::MAX, limit })?;
        guard("configuration space", size as u128, limit)?;
        Ok(size)
    }

    /// Number of sites (edges, vertices or cells).
    pub fn sites(&self) -> usize {
        match *self {
            Space::Edges { edges } => edges,
            Space::Spins { vertices, .. } => vertices,
            Space::Chains { cells, .. } => cells,
        }
    }

    pub fn modulus(&self) -> u32 {
        match *self {
            Space::Edges { .. } => 2,
            Space::Spins { q, .. } | Space::Chains { q, .. } => q,
        }
    }
}

/// Base-q digits of a configuration index.
pub fn digits(mut index: usize, q: u32, len: usize) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let d = (index % q as usize) as u32;
            index /= q as usize;
            d
        })
        .collect()
}

pub fn undigits(values: &[u32], q: u32) -> usize {
    values.iter().rev().fold(0usize, |acc, &v| acc * q as usize + v as usize)
}

/// Unnormalized weights over an enumerated space.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    pub space: Space,
    pub weights: Vec<f64>,
}

impl Measure {
    pub fn from_fn(space: Space, weight: impl Fn(usize) -> f64) -> Result<Self> {
        let size = space.guarded_size(ENUMERATION_GUARD)?;
        Ok(Self { space, weights: (0..size).map(weight).collect() })
    }

    pub fn try_from_fn(space: Space, weight: impl Fn(usize) -> Result<f64>) -> Result<Self> {
        let size = space.guarded_size(ENUMERATION_GUARD)?;
        Ok(Self { space, weights: (0..size).map(weight).collect::<Result<_>>()? })
    }
}

/// Normalized probability table.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub space: Space,
    pub probs: Vec<f64>,
}

pub fn exact_distribution(measure: &Measure) -> Result<Distribution> {
    Distribution::from_weights(measure.space, measure.weights.clone())
}

impl Distribution {
    pub fn from_weights(space: Space, mut weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidParameter(format!("weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptySupport);
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { space, probs: weights })
    }

    pub fn point_mass(space: Space, index: usize) -> Result<Self> {
        let size = space.guarded_size(ENUMERATION_GUARD)?;
        let mut probs = vec![0.0; size];
        probs[index] = 1.0;
        Ok(Self { space, probs })
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().copied().enumerate().filter(|&(_, p)| p > 0.0)
    }

    /// Restriction to `keep`, renormalized.
    pub fn conditioned(&self, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let w = self.probs.iter().enumerate().map(|(i, &p)| if keep(i) { p } else { 0.0 }).collect();
        Self::from_weights(self.space, w)
    }

    /// Image law under `map` into `target`.
    pub fn pushforward(&self, target: Space, map: impl Fn(usize) -> usize) -> Result<Self> {
        let size = target.guarded_size(ENUMERATION_GUARD)?;
        let mut probs = vec![0.0; size];
        for (i, p) in self.support() {
            probs[map(i)] += p;
        }
        Ok(Self { space: target, probs })
    }

    /// Pointwise reweighting by `factor`, renormalized.
    pub fn tilted(&self, factor: impl Fn(usize) -> f64) -> Result<Self> {
        let w = self.probs.iter().enumerate().map(|(i, &p)| if p > 0.0 { p * factor(i) } else { 0.0 }).collect();
        Self::from_weights(self.space, w)
    }

    /// Draw by categorical choice through any randomness source.
    pub fn draw<R: Randomness + ?Sized>(&self, rng: &mut R) -> usize {
        rng.categorical(&self.probs)
    }

    /// `config_bits,probability` rows, configurations as hex indices.
    pub fn to_csv(&self) -> String {
        let width = match self.space {
            Space::Edges { edges } => edges.div_ceil(4).max(1),
            _ => 1,
        };
        let mut out = String::from("config_bits,probability\n");
        for (i, p) in self.probs.iter().enumerate() {
            out.push_str(&format!("{i:0width$x},{p:.16e}\n"));
        }
        out
    }
}

pub fn tv_distance(a: &Distribution, b: &Distribution) -> Result<f64> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch);
    }
    Ok(0.5 * a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// max_i |a_i − b_i| / max(a_i, b_i), zero where both vanish.
pub fn max_rel_error(a: &Distribution, b: &Distribution) -> Result<f64> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch);
    }
    Ok(a.probs
        .iter()
        .zip(&b.probs)
        .map(|(&x, &y)| {
            let m = x.abs().max(y.abs());
            if m == 0.0 {
                0.0
            } else {
                (x - y).abs() / m
            }
        })
        .fold(0.0, f64::max))
}

/// Inversion sampler over a fixed table.
#[derive(Clone, Debug)]
pub struct TableSampler {
    cdf: Vec<f64>,
    index: Vec<usize>,
}

impl TableSampler {
    pub fn new(dist: &Distribution) -> Self {
        let mut cdf = Vec::new();
        let mut index = Vec::new();
        let mut acc = 0.0;
        for (i, p) in dist.support() {
            acc += p;
            cdf.push(acc);
            index.push(i);
        }
        Self { cdf, index }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.gen::<f64>() * self.cdf.last().copied().unwrap_or(0.0);
        let k = self.cdf.partition_point(|&c| c <= u).min(self.index.len() - 1);
        self.index[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_examples() {
        let s = Space::Edges { edges: 1 };
        let a = Distribution::from_weights(s, vec![0.5, 0.5]).unwrap();
        let b = Distribution::point_mass(s, 0).unwrap();
        let c = Distribution::point_mass(s, 1).unwrap();
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&b, &c).unwrap(), 1.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 0.5);
        assert!(tv_distance(&a, &Distribution::point_mass(Space::Edges { edges: 2 }, 0).unwrap()).is_err());
    }

    #[test]
    fn empty_support_is_an_error() {
        let m = Measure::from_fn(Space::Edges { edges: 2 }, |_| 0.0).unwrap();
        assert_eq!(exact_distribution(&m), Err(Error::EmptySupport));
    }

    #[test]
    fn guard_trips() {
        assert!(Measure::from_fn(Space::Chains { cells: 30, q: 3 }, |_| 1.0).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let d = digits(47, 3, 5);
        assert_eq!(undigits(&d, 3), 47);
    }

    #[test]
    fn csv_has_hex_configs() {
        let d = Distribution::from_weights(Space::Edges { edges: 5 }, vec![1.0; 32]).unwrap();
        let csv = d.to_csv();
        assert!(csv.lines().nth(32).unwrap().starts_with("1f,"));
    }
}
