//! Brute-force oracles for the exact identities between the models, plus
//! the inversion of sprinkling and thinning. Every check computes both sides
//! by independent routes and reports the largest relative discrepancy.

mod deconvolve;
mod identities;
mod suite;

pub use deconvolve::{deconvolve_intersect, deconvolve_union, exclusion_counterexample, uniform_downward_inversion, Deconvolution, DECONVOLUTION_EDGE_GUARD};
pub use identities::*;
pub use suite::{run_suite, sprinkling_recovery, SprinklingReport};

use serde::Serialize;

/// Pass threshold on the relative error of an identity.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityRecord {
    pub name: String,
    pub instance: String,
    pub max_rel_error: f64,
}

impl IdentityRecord {
    pub fn new(name: &str, instance: impl Into<String>, max_rel_error: f64) -> Self {
        Self { name: name.into(), instance: instance.into(), max_rel_error }
    }

    pub fn pass(&self) -> bool {
        self.max_rel_error < IDENTITY_TOLERANCE
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}
