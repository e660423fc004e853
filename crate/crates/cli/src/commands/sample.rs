use super::{row_id, row_input};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{OutputDir, Series};
use couplings::coupling::{RowId, RowInput};
use couplings::experiments::dynamics::RowChain;
use couplings::rng::chain_rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Serialize)]
struct ChainSummary {
    chain: u64,
    records: u64,
    means: BTreeMap<&'static str, f64>,
}

struct Plan {
    id: RowId,
    seed: u64,
    steps: u64,
    burn_in: u64,
    thin: u64,
    observables: Vec<String>,
}

fn run_chain(plan: &Plan, input: &RowInput, chain: u64) -> CliResult<(String, ChainSummary)> {
    let mut rng = chain_rng(plan.seed, chain);
    let mut state = RowChain::new(plan.id, input, &mut rng)?;
    for _ in 0..plan.burn_in {
        state.step(&mut rng)?;
    }
    let mut series = Series::new();
    let mut sums: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut records = 0;
    for step in 1..=plan.steps {
        state.step(&mut rng)?;
        if step % plan.thin != 0 {
            continue;
        }
        records += 1;
        for (name, value) in state.observe()? {
            if plan.observables.is_empty() || plan.observables.iter().any(|o| o == name) {
                series.push(step, name, value);
                *sums.entry(name).or_default() += value;
            }
        }
    }
    let means = sums.into_iter().map(|(k, v)| (k, v / records.max(1) as f64)).collect();
    Ok((series.into_string(), ChainSummary { chain, records, means }))
}

/// Runs independent chains of the row's dynamics, one CSV per chain.
pub fn run(config: &RunConfig) -> CliResult<bool> {
    let id = row_id(config)?;
    let input = row_input(config, id)?;
    let plan = Plan {
        id,
        seed: config.seed()?,
        steps: config.require_count("steps")?,
        burn_in: config.count("burn_in")?.unwrap_or(0),
        thin: config.count("thin")?.unwrap_or(1),
        observables: config.list("observables"),
    };
    let chains = config.count("chains")?.unwrap_or(1);
    let results: Vec<CliResult<(String, ChainSummary)>> = (0..chains).into_par_iter().map(|c| run_chain(&plan, &input, c)).collect();
    let out = OutputDir::create(config)?;
    let mut summaries = Vec::new();
    for (c, result) in results.into_iter().enumerate() {
        let (csv, summary) = result?;
        out.text(&format!("samples.chain-{c}.csv"), &csv)?;
        summaries.push(summary);
    }
    if let Some(missing) = plan.observables.iter().find(|o| summaries.iter().all(|s| !s.means.contains_key(o.as_str()))) {
        return Err(config.bad("observables", format!("row {id} does not record `{missing}`")));
    }
    out.json("summary.json", &summaries)?;
    Ok(true)
}
