use super::modulus;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{float, OutputDir};
use couplings::experiments::decay::{decay_point, DecayPoint, Lattice};
use couplings::rng::chain_rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Serialize)]
struct Report {
    lattice: Lattice,
    d: usize,
    q: u32,
    x: f64,
    points: Vec<DecayPoint>,
    /// Flow-support estimates never increase with n.
    nonincreasing: bool,
    /// Same for the coupled ω.
    cluster_nonincreasing: bool,
    /// supp(η) ⊂ ω held in every sample.
    contained: bool,
}

pub fn run(config: &RunConfig) -> CliResult<bool> {
    let lattice: Lattice = config.parsed("lattice")?.unwrap_or(Lattice::Box);
    let d = config.require_count("d")? as usize;
    let q = modulus(config)?.unwrap_or(2);
    let x = config.require_real("x")?;
    let seed = config.seed()?;
    let (samples, burn_in) = (config.require_count("steps")?, config.count("burn_in")?.unwrap_or(0));
    let sizes = config.sizes("sizes")?;
    let points: Vec<DecayPoint> = sizes
        .par_iter()
        .enumerate()
        .map(|(i, &n)| decay_point(lattice, d, n, q, x, samples, burn_in, &mut chain_rng(seed, i as u64)))
        .collect::<Result<_, _>>()?;
    let mut csv = String::from("n,estimate,lower,upper,cluster_estimate,cluster_lower,cluster_upper,samples,contained,wrap_estimate\n");
    for p in &points {
        let wrap = p.wraps.map(|w| float(w.estimate)).unwrap_or_default();
        let (c, w) = (&p.crossing, &p.cluster_crossing);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{wrap}\n",
            p.n,
            float(c.estimate),
            float(c.lower),
            float(c.upper),
            float(w.estimate),
            float(w.lower),
            float(w.upper),
            p.samples,
            p.contained
        ));
    }
    let report = Report {
        lattice,
        d,
        q,
        x,
        nonincreasing: points.windows(2).all(|w| w[1].crossing.estimate <= w[0].crossing.estimate),
        cluster_nonincreasing: points.windows(2).all(|w| w[1].cluster_crossing.estimate <= w[0].cluster_crossing.estimate),
        contained: points.iter().all(|p| p.contained == p.samples),
        points,
    };
    let out = OutputDir::create(config)?;
    out.text("decay.csv", &csv)?;
    out.json("decay.json", &report)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(report.contained)
}
