//! Randomness sources. Samplers draw through [`Randomness`], which is
//! implemented both by ordinary generators and by [`Branching`], a replaying
//! source that walks every possible sequence of draws. Running a sampler
//! under [`exact_outcomes`] therefore yields its exact output law, which is
//! how transition kernels are built for stationarity checks.

use crate::error::{Error, Result};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::hash::Hash;

pub trait Randomness {
    /// True with probability p (p outside [0,1] is clamped).
    fn bernoulli(&mut self, p: f64) -> bool;
    /// Uniform in 0..n, n ≥ 1.
    fn below(&mut self, n: u32) -> u32;
    /// Index drawn proportionally to nonnegative `weights`.
    fn categorical(&mut self, weights: &[f64]) -> usize;
    /// Index drawn from a nondecreasing cumulative table.
    fn categorical_cdf(&mut self, cdf: &[f64]) -> usize {
        let weights: Vec<f64> = cdf.iter().scan(0.0, |prev, &c| {
            let w = c - *prev;
            *prev = c;
            Some(w)
        }).collect();
        self.categorical(&weights)
    }
}

impl<R: RngCore + ?Sized> Randomness for R {
    fn bernoulli(&mut self, p: f64) -> bool {
        self.gen::<f64>() < p
    }

    fn below(&mut self, n: u32) -> u32 {
        self.gen_range(0..n)
    }

    fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.gen::<f64>() * total;
        let mut last = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                if u < w {
                    return i;
                }
                u -= w;
                last = i;
            }
        }
        last
    }

    fn categorical_cdf(&mut self, cdf: &[f64]) -> usize {
        let u = self.gen::<f64>() * cdf.last().copied().unwrap_or(0.0);
        cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
    }
}

/// Per-chain generator: ChaCha8 keyed by the master seed, one stream per
/// chain index.
pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

#[derive(Clone, Copy, Debug)]
struct Choice {
    value: u32,
    arity: u32,
}

/// Replays a script of choices, extending it with first options as needed.
#[derive(Debug, Default)]
pub struct Branching {
    script: Vec<Choice>,
    cursor: usize,
    weight: f64,
}

impl Branching {
    fn choose(&mut self, arity: u32) -> u32 {
        let value = if self.cursor < self.script.len() {
            let c = self.script[self.cursor];
            assert_eq!(c.arity, arity, "sampler is not deterministic given its draws");
            c.value
        } else {
            self.script.push(Choice { value: 0, arity });
            0
        };
        self.cursor += 1;
        value
    }

    /// Moves to the next unexplored branch; false when exhausted.
    fn advance(&mut self) -> bool {
        while let Some(last) = self.script.last_mut() {
            if last.value + 1 < last.arity {
                last.value += 1;
                return true;
            }
            self.script.pop();
        }
        false
    }
}

impl Randomness for Branching {
    fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            return false;
        }
        if p >= 1.0 {
            return true;
        }
        let hit = self.choose(2) == 1;
        self.weight *= if hit { p } else { 1.0 - p };
        hit
    }

    fn below(&mut self, n: u32) -> u32 {
        assert!(n >= 1);
        if n == 1 {
            return 0;
        }
        let v = self.choose(n);
        self.weight /= n as f64;
        v
    }

    fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let live: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        let pick = live[self.choose(live.len() as u32) as usize];
        self.weight *= weights[pick] / total;
        pick
    }
}

/// Exact output distribution of a randomized procedure, by exhausting its
/// decision tree. `limit` caps the number of leaves.
pub fn exact_outcomes<T, F>(limit: u64, mut run: F) -> Result<HashMap<T, f64>>
where
    T: Eq + Hash,
    F: FnMut(&mut Branching) -> T,
{
    let mut src = Branching::default();
    let mut law: HashMap<T, f64> = HashMap::new();
    let mut leaves = 0u64;
    loop {
        src.cursor = 0;
        src.weight = 1.0;
        let out = run(&mut src);
        debug_assert_eq!(src.cursor, src.script.len());
        if src.weight > 0.0 {
            *law.entry(out).or_insert(0.0) += src.weight;
        }
        leaves += 1;
        if leaves > limit {
            return Err(Error::SizeGuard { what: "decision-tree leaves", size: leaves as u128, limit: limit as u128 });
        }
        if !src.advance() {
            return Ok(law);
        }
    }
}
