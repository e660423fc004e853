use super::graph;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{float, OutputDir};
use couplings::experiments::arboreal::{arboreal_exact, run_arboreal, ArborealExact, ArborealReport};
use couplings::rng::chain_rng;
use serde::Serialize;

/// Largest graph on which the recomposition is also checked exactly.
const EXACT_EDGE_LIMIT: usize = 10;
const EXACT_TOLERANCE: f64 = 1e-10;

#[derive(Serialize)]
struct Report {
    sampled: ArborealReport,
    exact: Option<ArborealExact>,
    pass: bool,
}

pub fn run(config: &RunConfig) -> CliResult<bool> {
    let graph = graph(config)?;
    let beta = config.require_real("beta")?;
    let epsilon = config.require_real("epsilon")?;
    let samples = config.require_count("steps")?;
    let burn_in = config.count("burn_in")?.unwrap_or(0);
    let sampled = run_arboreal(&graph, beta, epsilon, samples, burn_in, &mut chain_rng(config.seed()?, 0))?;
    let exact = if graph.edge_count() <= EXACT_EDGE_LIMIT { Some(arboreal_exact(&graph, beta, epsilon)?) } else { None };
    let pass = sampled.violations == 0
        && exact.as_ref().is_none_or(|e| e.row_worst_tv < EXACT_TOLERANCE && e.recomposition_tv < EXACT_TOLERANCE);
    let out = OutputDir::create(config)?;
    let mut csv = String::from("distance,pairs,connected,conditional,bound\n");
    for row in &sampled.by_distance {
        csv.push_str(&format!("{},{},{},{},{}\n", row.distance, row.pairs, float(row.connected), float(row.conditional), float(row.bound)));
    }
    out.text("two_point.csv", &csv)?;
    let report = Report { sampled, exact, pass };
    out.json("arboreal.json", &report)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(pass)
}
