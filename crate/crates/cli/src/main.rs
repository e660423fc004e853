mod commands;
mod config;
mod error;
mod output;
mod specs;

use clap::{Args, Parser, Subcommand};
use config::{Command, RunConfig};
use error::{CliError, CliResult};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "couplings", version, about = "Exact checks and Monte Carlo experiments for coupled lattice models")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Write the two marginal tables of a registry row.
    Enumerate(RunArgs),
    /// Run the identity suite, the registry, the sprinkling inversions.
    Check(RunArgs),
    /// Run a row's Markov chain and log observables.
    Sample(RunArgs),
    /// Nonzero flow versus wrapping on a torus.
    Torus(RunArgs),
    /// Thinned arboreal gas: two-point bound and recomposition.
    Arboreal(RunArgs),
    /// Connection probability of the flow support across sizes.
    Decay(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` file, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default out/<command>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra `key=value` override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    row: Option<String>,
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    complex: Option<String>,
    /// Shorthand for `--graph torus:d,n`.
    #[arg(long, value_name = "D,N")]
    torus: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    j: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    loop_n: Option<String>,
    #[arg(long)]
    loop_m: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    chains: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    #[arg(long)]
    thin: Option<String>,
    #[arg(long)]
    observables: Option<String>,
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    lattice: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    batches: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> CliResult<Vec<(String, String)>> {
        let flags = [
            ("row", &self.row),
            ("graph", &self.graph),
            ("complex", &self.complex),
            ("torus", &self.torus),
            ("q", &self.q),
            ("j", &self.j),
            ("t", &self.t),
            ("p", &self.p),
            ("x", &self.x),
            ("a", &self.a),
            ("b", &self.b),
            ("family", &self.family),
            ("k", &self.k),
            ("loop_n", &self.loop_n),
            ("loop_m", &self.loop_m),
            ("seed", &self.seed),
            ("chains", &self.chains),
            ("steps", &self.steps),
            ("burn_in", &self.burn_in),
            ("thin", &self.thin),
            ("observables", &self.observables),
            ("suite", &self.suite),
            ("beta", &self.beta),
            ("epsilon", &self.epsilon),
            ("lattice", &self.lattice),
            ("d", &self.d),
            ("sizes", &self.sizes),
            ("batches", &self.batches),
        ];
        let mut out: Vec<(String, String)> = flags.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect();
        for pair in &self.set {
            let (k, v) = pair.split_once('=').ok_or_else(|| CliError::Syntax { line: 0, msg: format!("--set expects KEY=VALUE, got `{pair}`") })?;
            out.push((k.to_string(), v.to_string()));
        }
        Ok(out)
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("COUPLINGS_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

fn execute(cli: Cli) -> CliResult<bool> {
    let (command, args) = match cli.command {
        Sub::Enumerate(a) => (Command::Enumerate, a),
        Sub::Check(a) => (Command::Check, a),
        Sub::Sample(a) => (Command::Sample, a),
        Sub::Torus(a) => (Command::Torus, a),
        Sub::Arboreal(a) => (Command::Arboreal, a),
        Sub::Decay(a) => (Command::Decay, a),
    };
    let config = RunConfig::resolve(command, args.config.as_deref(), &args.overrides()?, args.out.clone())?;
    thread_pool()?.install(|| commands::run(&config))
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("couplings: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("couplings: {e}");
            ExitCode::from(2)
        }
    }
}
