//! Couplings between spin, loop, flow and percolation models on finite
//! graphs and cubical complexes: exact enumeration oracles, Markov chain and
//! direct samplers, and the experiments built on them.

pub mod error;
pub mod gauge;
pub mod chains;
pub mod coupling;
pub mod graph;
pub mod experiments;
pub mod measures;
pub mod oracle;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
