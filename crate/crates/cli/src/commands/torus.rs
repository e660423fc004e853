use super::{graph, modulus};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{OutputDir, Series};
use couplings::error::ENUMERATION_GUARD;
use couplings::experiments::torus::{run_torus_chain, summarize_torus, torus_exact, TorusExactReport, TorusSeries, TorusStatReport};
use couplings::rng::chain_rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Serialize)]
struct TorusReport {
    statistical: TorusStatReport,
    /// Present when every q-chain on the torus can be enumerated.
    exact: Option<TorusExactReport>,
    pass: bool,
}

fn series_csv(s: &TorusSeries) -> String {
    let mut out = Series::new();
    for (i, ((f, w), o)) in s.flow_nonzero.iter().zip(&s.wraps).zip(&s.wraps_once).enumerate() {
        let step = i as u64 + 1;
        out.push(step, "flow_nonzero", *f);
        out.push(step, "wraps", *w);
        out.push(step, "wraps_once", *o);
    }
    out.into_string()
}

/// Loop-cluster chains on a torus comparing the nonzero-flow probability
/// with (q−1)/q times the wrapping probability, plus the exact pipeline
/// when the torus is small enough.
pub fn run(config: &RunConfig) -> CliResult<bool> {
    let graph = graph(config)?;
    let q = modulus(config)?.unwrap_or(3);
    let x = config.require_real("x")?;
    let seed = config.seed()?;
    let (steps, burn_in) = (config.require_count("steps")?, config.count("burn_in")?.unwrap_or(0));
    let chains = config.count("chains")?.unwrap_or(1);
    let batches = config.count("batches")?.unwrap_or(20) as usize;
    let series: Vec<TorusSeries> = (0..chains)
        .into_par_iter()
        .map(|c| run_torus_chain(&graph, q, x, steps, burn_in, &mut chain_rng(seed, c)))
        .collect::<Result<_, _>>()?;
    let statistical = summarize_torus(q, x, &series, batches);
    let enumerable = (q as u128).checked_pow(graph.edge_count() as u32).is_some_and(|n| n <= ENUMERATION_GUARD);
    let exact = if enumerable { Some(torus_exact(&graph, q, x)?) } else { None };
    let pass = statistical.holds && exact.as_ref().is_none_or(|e| e.holds && e.census.exact && e.census.unwound_flows == 0);
    let out = OutputDir::create(config)?;
    for (c, s) in series.iter().enumerate() {
        out.text(&format!("torus.chain-{c}.csv"), &series_csv(s))?;
    }
    let report = TorusReport { statistical, exact, pass };
    out.json("torus.json", &report)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(pass)
}
