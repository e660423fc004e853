//! Monte Carlo experiments: torus flow versus wrapping, arboreal two-point
//! bounds, subcritical decay and per-row sampling chains.

pub mod arboreal;
pub mod decay;
pub mod dynamics;
pub mod stats;
pub mod torus;
