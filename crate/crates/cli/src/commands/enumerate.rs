use super::{row_id, row_input, RowSummary};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::OutputDir;
use couplings::coupling::CouplingRow;

/// Writes the Ω- and Σ-marginals of the row's joint table and checks them
/// against the predicted laws.
pub fn run(config: &RunConfig) -> CliResult<bool> {
    let id = row_id(config)?;
    let row = CouplingRow::build(id, &row_input(config, id)?)?;
    let out = OutputDir::create(config)?;
    out.text("omega_marginal.csv", &row.spec.marginal_omega()?.to_csv())?;
    out.text("sigma_marginal.csv", &row.spec.marginal_sigma()?.to_csv())?;
    let summary = RowSummary::from(&row.verify()?);
    out.json("report.json", &summary)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(summary.pass)
}
