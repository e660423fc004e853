mod arboreal;
mod check;
mod decay;
mod enumerate;
mod sample;
mod torus;

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::specs::{complex_from_spec, family_from_name, graph_from_spec};
use couplings::coupling::{RowId, RowInput, RowReport};
use couplings::graph::{Coupling, Graph};
use serde::Serialize;

/// Runs the command and reports whether every assertion held.
pub fn run(config: &RunConfig) -> CliResult<bool> {
    match config.command {
        Command::Enumerate => enumerate::run(config),
        Command::Check => check::run(config),
        Command::Sample => sample::run(config),
        Command::Torus => torus::run(config),
        Command::Arboreal => arboreal::run(config),
        Command::Decay => decay::run(config),
    }
}

fn row_id(config: &RunConfig) -> CliResult<RowId> {
    Ok(config.get("row").ok_or(CliError::MissingKey("row"))?.parse::<RowId>()?)
}

fn modulus(config: &RunConfig) -> CliResult<Option<u32>> {
    config.count("q")?.map(|q| u32::try_from(q).map_err(|_| config.bad("q", "too large"))).transpose()
}

fn graph(config: &RunConfig) -> CliResult<Graph> {
    let mut graph = graph_from_spec(config.get("graph").ok_or(CliError::MissingKey("graph"))?)?;
    apply_couplings(config, &mut graph)?;
    Ok(graph)
}

fn apply_couplings(config: &RunConfig, graph: &mut Graph) -> CliResult<()> {
    if let Some(t) = config.real("t")? {
        graph.set_uniform(Coupling::T(t))?;
    } else if let Some(j) = config.real("j")? {
        graph.set_uniform(Coupling::J(j))?;
    }
    Ok(())
}

/// The row's designated instance with every configured key laid over it.
fn row_input(config: &RunConfig, id: RowId) -> CliResult<RowInput> {
    let mut input = RowInput::designated(id)?;
    if let Some(spec) = config.get("graph") {
        input.graph = graph_from_spec(spec)?;
    }
    apply_couplings(config, &mut input.graph)?;
    if let Some(spec) = config.get("complex") {
        input.complex = complex_from_spec(spec)?;
    }
    if let Some(q) = modulus(config)? {
        input.q = q;
    }
    if let Some(name) = config.get("family") {
        input.family = family_from_name(name)?;
    }
    if config.get("a").is_some() {
        input.a = config.vertices("a")?;
    }
    if config.get("b").is_some() {
        input.b = config.vertices("b")?;
    }
    if let Some(k) = config.count("k")? {
        input.k = k as usize;
    }
    for (key, slot) in [("x", &mut input.x), ("p", &mut input.p), ("j", &mut input.j), ("loop_n", &mut input.n), ("loop_m", &mut input.m)] {
        if let Some(v) = config.real(key)? {
            *slot = v;
        }
    }
    Ok(input)
}

#[derive(Serialize)]
struct RowSummary {
    row: String,
    instance: String,
    joint_omega: f64,
    joint_sigma: f64,
    predicted_omega: f64,
    predicted_sigma: f64,
    given_omega: f64,
    given_eta: f64,
    enumerators_consistent: bool,
    pass: bool,
}

/// Joint tables must reproduce every predicted law to this TV.
const ROW_TOLERANCE: f64 = 1e-12;

impl From<&RowReport> for RowSummary {
    fn from(r: &RowReport) -> Self {
        Self {
            row: r.id.to_string(),
            instance: r.instance.clone(),
            joint_omega: r.joint_omega,
            joint_sigma: r.joint_sigma,
            predicted_omega: r.predicted_omega,
            predicted_sigma: r.predicted_sigma,
            given_omega: r.given_omega,
            given_eta: r.given_eta,
            enumerators_consistent: r.enumerators_consistent,
            pass: r.passes(ROW_TOLERANCE),
        }
    }
}
