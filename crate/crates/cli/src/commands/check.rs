use super::RowSummary;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::OutputDir;
use couplings::coupling::{CouplingRow, RowId};
use couplings::oracle::{exclusion_counterexample, run_suite, sprinkling_recovery, Deconvolution, IdentityRecord, SprinklingReport};
use rayon::prelude::*;
use serde::Serialize;

const SPRINKLING_TOLERANCE: f64 = 1e-10;

#[derive(Serialize)]
struct ExclusionRecord {
    x: f64,
    expected_infeasible: bool,
    infeasible: bool,
    pass: bool,
}

#[derive(Serialize)]
struct IdentityLine {
    #[serde(flatten)]
    record: IdentityRecord,
    pass: bool,
}

#[derive(Serialize)]
struct SprinklingRecord {
    #[serde(flatten)]
    report: SprinklingReport,
    pass: bool,
}

#[derive(Serialize, Default)]
struct CheckReport {
    suite: String,
    seed: u64,
    identities: Vec<IdentityLine>,
    registry: Vec<RowSummary>,
    sprinkling: Vec<SprinklingRecord>,
    exclusion: Vec<ExclusionRecord>,
    pass: bool,
}

fn emit<T: Serialize>(record: &T) -> CliResult<()> {
    println!("{}", serde_json::to_string(record)?);
    Ok(())
}

pub fn run(config: &RunConfig) -> CliResult<bool> {
    let suite = config.get("suite").unwrap_or("all").to_string();
    let wants = |part: &str| suite == "all" || suite == part;
    if !["all", "identities", "registry", "sprinkling", "exclusion"].contains(&suite.as_str()) {
        return Err(config.bad("suite", "expected all, identities, registry, sprinkling or exclusion"));
    }
    let seed = config.seed()?;
    let mut report = CheckReport { suite: suite.clone(), seed, ..Default::default() };
    if wants("identities") {
        report.identities = run_suite(seed)?.into_iter().map(|r| IdentityLine { pass: r.pass(), record: r }).collect();
    }
    if wants("registry") {
        let rows: Vec<_> = RowId::ALL.par_iter().map(|&id| CouplingRow::designated(id).and_then(|r| r.verify())).collect();
        for row in rows {
            report.registry.push(RowSummary::from(&row?));
        }
    }
    if wants("sprinkling") {
        report.sprinkling = sprinkling_recovery(seed)?
            .into_iter()
            .map(|r| SprinklingRecord { pass: r.passes(SPRINKLING_TOLERANCE), report: r })
            .collect();
    }
    if wants("exclusion") {
        for x in [0.5, 1.0, 1.5, 4.0] {
            let infeasible = matches!(exclusion_counterexample(x)?, Deconvolution::Infeasible { .. });
            report.exclusion.push(ExclusionRecord { x, expected_infeasible: x > 1.0, infeasible, pass: infeasible == (x > 1.0) });
        }
    }
    report.identities.iter().try_for_each(emit)?;
    report.registry.iter().try_for_each(emit)?;
    report.sprinkling.iter().try_for_each(emit)?;
    report.exclusion.iter().try_for_each(emit)?;
    report.pass = report.identities.iter().all(|r| r.pass)
        && report.registry.iter().all(|r| r.pass)
        && report.sprinkling.iter().all(|r| r.pass)
        && report.exclusion.iter().all(|r| r.pass);
    OutputDir::create(config)?.json("check.json", &report)?;
    Ok(report.pass)
}
