//! The generic coupling: a joint law on Ω × Σ proportional to
//! ρ[ω] γ[η] 1[η ∈ f(ω)], with exact marginals and conditionals and a
//! two-step sampler.

mod registry;

pub use registry::{flow_to_cluster_p, two_triangles, with_couplings, CouplingRow, RowId, RowInput, RowReport};

use crate::error::{guard, Error, Result, ENUMERATION_GUARD};
use crate::measures::{Distribution, Space};
use crate::rng::Randomness;
use std::sync::Arc;

/// Largest |Ω|·|Σ| scanned when neither enumerator is registered.
pub const PAIR_GUARD: u128 = 1 << 22;

/// Default cap on rejection proposals.
pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

pub type Predicate = Arc<dyn Fn(usize, usize) -> bool + Send + Sync>;
pub type Enumerator = Arc<dyn Fn(usize) -> Vec<usize> + Send + Sync>;
pub type ConditionalSampler = Arc<dyn Fn(usize, &mut dyn Randomness) -> Result<usize> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Given ω, draw η from γ[· | f(ω)].
    OmegaToEta,
    /// Given η, draw ω from ρ[· | f⁻¹(η)].
    EtaToOmega,
}

#[derive(Clone)]
pub struct CouplingSpec {
    omega: Space,
    sigma: Space,
    rho: Vec<f64>,
    gamma: Vec<f64>,
    predicate: Predicate,
    forward: Option<Enumerator>,
    fiber: Option<Enumerator>,
    eta_sampler: Option<ConditionalSampler>,
    omega_sampler: Option<ConditionalSampler>,
    rho_cdf: Vec<f64>,
    gamma_cdf: Vec<f64>,
    rejection_cap: u64,
}

fn checked_weights(space: Space, w: &[f64]) -> Result<()> {
    if Some(w.len()) != space.size() {
        return Err(Error::SpaceMismatch);
    }
    if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter("weights must be finite and nonnegative".into()));
    }
    if w.iter().all(|&x| x == 0.0) {
        return Err(Error::EmptySupport);
    }
    Ok(())
}

fn cdf(w: &[f64]) -> Vec<f64> {
    w.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// A normalized joint table, stored sparsely.
#[derive(Clone, Debug)]
pub struct JointTable {
    pub omega: Space,
    pub sigma: Space,
    pub entries: Vec<(usize, usize, f64)>,
}

impl JointTable {
    /// Row sums.
    pub fn omega_marginal(&self) -> Result<Distribution> {
        let mut w = vec![0.0; self.omega.guarded_size(ENUMERATION_GUARD)?];
        for &(o, _, p) in &self.entries {
            w[o] += p;
        }
        Distribution::from_weights(self.omega, w)
    }

    /// Column sums.
    pub fn sigma_marginal(&self) -> Result<Distribution> {
        let mut w = vec![0.0; self.sigma.guarded_size(ENUMERATION_GUARD)?];
        for &(_, s, p) in &self.entries {
            w[s] += p;
        }
        Distribution::from_weights(self.sigma, w)
    }
}

impl CouplingSpec {
    pub fn new(omega: Space, sigma: Space, rho: Vec<f64>, gamma: Vec<f64>, predicate: Predicate) -> Result<Self> {
        omega.guarded_size(ENUMERATION_GUARD)?;
        sigma.guarded_size(ENUMERATION_GUARD)?;
        checked_weights(omega, &rho)?;
        checked_weights(sigma, &gamma)?;
        Ok(Self {
            rho_cdf: cdf(&rho),
            gamma_cdf: cdf(&gamma),
            omega,
            sigma,
            rho,
            gamma,
            predicate,
            forward: None,
            fiber: None,
            eta_sampler: None,
            omega_sampler: None,
            rejection_cap: DEFAULT_REJECTION_CAP,
        })
    }

    /// Registers an enumerator of f(ω).
    pub fn with_forward(mut self, forward: Enumerator) -> Self {
        self.forward = Some(forward);
        self
    }

    /// Registers an enumerator of f⁻¹(η).
    pub fn with_fiber(mut self, fiber: Enumerator) -> Self {
        self.fiber = Some(fiber);
        self
    }

    pub fn with_sampler(mut self, direction: Direction, sampler: ConditionalSampler) -> Self {
        match direction {
            Direction::OmegaToEta => self.eta_sampler = Some(sampler),
            Direction::EtaToOmega => self.omega_sampler = Some(sampler),
        }
        self
    }

    pub fn with_rejection_cap(mut self, cap: u64) -> Self {
        self.rejection_cap = cap;
        self
    }

    pub fn omega_space(&self) -> Space {
        self.omega
    }

    pub fn sigma_space(&self) -> Space {
        self.sigma
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn has_direct_sampler(&self, direction: Direction) -> bool {
        match direction {
            Direction::OmegaToEta => self.eta_sampler.is_some(),
            Direction::EtaToOmega => self.omega_sampler.is_some(),
        }
    }

    pub fn contains(&self, omega: usize, eta: usize) -> bool {
        (self.predicate)(omega, eta)
    }

    pub fn joint_weight(&self, omega: usize, eta: usize) -> f64 {
        let w = self.rho[omega] * self.gamma[eta];
        if w > 0.0 && (self.predicate)(omega, eta) {
            w
        } else {
            0.0
        }
    }

    fn pair_guard(&self) -> Result<()> {
        guard("joint pairs", (self.rho.len() as u128) * (self.gamma.len() as u128), PAIR_GUARD)
    }

    /// f(ω), from the enumerator or by scanning Σ.
    pub fn forward_of(&self, omega: usize) -> Result<Vec<usize>> {
        match &self.forward {
            Some(f) => Ok(f(omega)),
            None => {
                self.pair_guard()?;
                Ok((0..self.gamma.len()).filter(|&s| (self.predicate)(omega, s)).collect())
            }
        }
    }

    /// f⁻¹(η), from the enumerator or by scanning Ω.
    pub fn fiber_of(&self, eta: usize) -> Result<Vec<usize>> {
        match &self.fiber {
            Some(f) => Ok(f(eta)),
            None => {
                self.pair_guard()?;
                Ok((0..self.rho.len()).filter(|&o| (self.predicate)(o, eta)).collect())
            }
        }
    }

    /// The normalized joint law.
    pub fn joint(&self) -> Result<JointTable> {
        let mut entries = Vec::new();
        if self.forward.is_some() {
            for o in (0..self.rho.len()).filter(|&o| self.rho[o] > 0.0) {
                for s in self.forward_of(o)? {
                    entries.push((o, s, self.rho[o] * self.gamma[s]));
                }
            }
        } else if self.fiber.is_some() {
            for s in (0..self.gamma.len()).filter(|&s| self.gamma[s] > 0.0) {
                for o in self.fiber_of(s)? {
                    entries.push((o, s, self.rho[o] * self.gamma[s]));
                }
            }
        } else {
            self.pair_guard()?;
            for o in 0..self.rho.len() {
                for s in 0..self.gamma.len() {
                    let w = self.joint_weight(o, s);
                    if w > 0.0 {
                        entries.push((o, s, w));
                    }
                }
            }
        }
        entries.retain(|e| e.2 > 0.0);
        let total: f64 = entries.iter().map(|e| e.2).sum();
        if total <= 0.0 {
            return Err(Error::EmptySupport);
        }
        entries.iter_mut().for_each(|e| e.2 /= total);
        Ok(JointTable { omega: self.omega, sigma: self.sigma, entries })
    }

    /// P_Ω[ω] ∝ γ[f(ω)] ρ[ω].
    pub fn marginal_omega(&self) -> Result<Distribution> {
        let w = (0..self.rho.len())
            .map(|o| {
                if self.rho[o] == 0.0 {
                    return Ok(0.0);
                }
                Ok(self.rho[o] * self.forward_of(o)?.iter().map(|&s| self.gamma[s]).sum::<f64>())
            })
            .collect::<Result<Vec<f64>>>()?;
        Distribution::from_weights(self.omega, w)
    }

    /// P_Σ[η] ∝ ρ[f⁻¹(η)] γ[η].
    pub fn marginal_sigma(&self) -> Result<Distribution> {
        let w = (0..self.gamma.len())
            .map(|s| {
                if self.gamma[s] == 0.0 {
                    return Ok(0.0);
                }
                Ok(self.gamma[s] * self.fiber_of(s)?.iter().map(|&o| self.rho[o]).sum::<f64>())
            })
            .collect::<Result<Vec<f64>>>()?;
        Distribution::from_weights(self.sigma, w)
    }

    /// γ restricted to f(ω); ω must carry positive marginal mass.
    pub fn conditional_given_omega(&self, omega: usize) -> Result<Distribution> {
        if omega >= self.rho.len() || self.rho[omega] == 0.0 {
            return Err(Error::ZeroMass);
        }
        let mut w = vec![0.0; self.gamma.len()];
        for s in self.forward_of(omega)? {
            w[s] = self.gamma[s];
        }
        Distribution::from_weights(self.sigma, w).map_err(|_| Error::ZeroMass)
    }

    /// ρ restricted to f⁻¹(η); η must carry positive marginal mass.
    pub fn conditional_given_eta(&self, eta: usize) -> Result<Distribution> {
        if eta >= self.gamma.len() || self.gamma[eta] == 0.0 {
            return Err(Error::ZeroMass);
        }
        let mut w = vec![0.0; self.rho.len()];
        for o in self.fiber_of(eta)? {
            w[o] = self.rho[o];
        }
        Distribution::from_weights(self.omega, w).map_err(|_| Error::ZeroMass)
    }

    /// One draw from the conditional law given `input`, by the registered
    /// direct sampler or else by rejection from γ (resp. ρ).
    pub fn sample_two_step(&self, direction: Direction, input: usize, rng: &mut dyn Randomness) -> Result<usize> {
        let (own, sampler, proposal) = match direction {
            Direction::OmegaToEta => (&self.rho, &self.eta_sampler, &self.gamma_cdf),
            Direction::EtaToOmega => (&self.gamma, &self.omega_sampler, &self.rho_cdf),
        };
        if input >= own.len() || own[input] == 0.0 {
            return Err(Error::ZeroMass);
        }
        if let Some(sample) = sampler {
            return sample(input, rng);
        }
        for _ in 0..self.rejection_cap {
            let candidate = rng.categorical_cdf(proposal);
            let hit = match direction {
                Direction::OmegaToEta => (self.predicate)(input, candidate),
                Direction::EtaToOmega => (self.predicate)(candidate, input),
            };
            if hit {
                return Ok(candidate);
            }
        }
        Err(Error::RejectionBudget(self.rejection_cap))
    }

    /// Checks that the registered enumerators agree with the predicate.
    pub fn check_enumerators(&self) -> Result<bool> {
        self.pair_guard()?;
        if let Some(f) = &self.forward {
            for o in 0..self.rho.len() {
                let mut listed = f(o);
                listed.sort_unstable();
                let scanned: Vec<usize> = (0..self.gamma.len()).filter(|&s| (self.predicate)(o, s)).collect();
                if listed != scanned {
                    return Ok(false);
                }
            }
        }
        if let Some(f) = &self.fiber {
            for s in 0..self.gamma.len() {
                let mut listed = f(s);
                listed.sort_unstable();
                let scanned: Vec<usize> = (0..self.rho.len()).filter(|&o| (self.predicate)(o, s)).collect();
                if listed != scanned {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::tv_distance;
    use crate::rng::exact_outcomes;

    fn toy(predicate: Predicate) -> CouplingSpec {
        CouplingSpec::new(Space::Edges { edges: 2 }, Space::Edges { edges: 1 }, vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 3.0], predicate).unwrap()
    }

    #[test]
    fn joint_weight_examples() {
        let spec = toy(Arc::new(|o, s| s == 0 || o & 1 == 1));
        assert_eq!(spec.joint_weight(0, 1), 0.0);
        assert_eq!(spec.joint_weight(1, 1), 6.0);
        let uniform = CouplingSpec::new(Space::Edges { edges: 1 }, Space::Edges { edges: 1 }, vec![1.0; 2], vec![1.0; 2], Arc::new(|_, _| true)).unwrap();
        assert!((0..2).all(|o| (0..2).all(|s| uniform.joint_weight(o, s) == 1.0)));
    }

    #[test]
    fn marginals_match_joint_sums() {
        let spec = toy(Arc::new(|o, s| s == 0 || o & 1 == 1));
        let joint = spec.joint().unwrap();
        assert!(tv_distance(&joint.omega_marginal().unwrap(), &spec.marginal_omega().unwrap()).unwrap() < 1e-15);
        assert!(tv_distance(&joint.sigma_marginal().unwrap(), &spec.marginal_sigma().unwrap()).unwrap() < 1e-15);
        // P_Σ[1] ∝ 3·(2+4), P_Σ[0] ∝ 1·10.
        assert!((spec.marginal_sigma().unwrap().prob(1) - 18.0 / 28.0).abs() < 1e-15);
    }

    #[test]
    fn enumerators_checked() {
        let pred: Predicate = Arc::new(|o, s| s == 0 || o & 1 == 1);
        let good = toy(pred.clone()).with_forward(Arc::new(|o| if o & 1 == 1 { vec![0, 1] } else { vec![0] }));
        assert!(good.check_enumerators().unwrap());
        let bad = toy(pred).with_fiber(Arc::new(|_| vec![1]));
        assert!(!bad.check_enumerators().unwrap());
    }

    #[test]
    fn conditionals_and_zero_mass() {
        let spec = CouplingSpec::new(Space::Edges { edges: 1 }, Space::Edges { edges: 1 }, vec![0.0, 1.0], vec![1.0, 1.0], Arc::new(|o, s| s <= o)).unwrap();
        assert_eq!(spec.conditional_given_omega(0), Err(Error::ZeroMass));
        let c = spec.conditional_given_omega(1).unwrap();
        assert_eq!((c.prob(0), c.prob(1)), (0.5, 0.5));
        assert_eq!(spec.conditional_given_eta(0).unwrap().prob(1), 1.0);
    }

    #[test]
    fn rejection_sampler_is_exact() {
        let spec = toy(Arc::new(|o, s| s == 0 || o & 1 == 1));
        let capped = spec.with_rejection_cap(3);
        let law = exact_outcomes(10_000, |r| capped.sample_two_step(Direction::EtaToOmega, 1, r).ok()).unwrap();
        let accepted: f64 = law.iter().filter(|(k, _)| k.is_some()).map(|(_, p)| p).sum();
        let odd3 = law.get(&Some(3)).copied().unwrap_or(0.0) / accepted;
        assert!((odd3 - 4.0 / 6.0).abs() < 1e-12);
        assert!(law.get(&None).copied().unwrap_or(0.0) > 0.0);
    }
}
