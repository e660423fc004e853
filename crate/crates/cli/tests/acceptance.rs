use couplings::chains::{is_divergence_free, sample_uniform_kernel, ChainQ};
use couplings::coupling::{with_couplings, CouplingRow, RowId};
use couplings::experiments::torus::{run_torus_chain, summarize_torus, winding_census};
use couplings::gauge::CubicalComplex;
use couplings::graph::{EdgeSet, Graph, VertexSet};
use couplings::measures::{
    digits, exact_distribution, qflow_measure, spin_measure, traced_current_exact, tv_distance, undigits, union_measure, Distribution, Space,
    SpinModel,
};
use couplings::oracle::{run_suite, sprinkling_recovery};
use couplings::rng::{chain_rng, exact_outcomes, Branching};
use couplings::samplers::{
    loop_cluster_step, plaquette_lc_step, sample_ueg, sample_ug_sources, sw_step, DoubleCurrentSampler, LoopMethod, SingleCurrentSampler,
};
use rayon::prelude::*;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

type Verdict = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Verdict, Option<Duration>);

const J: [f64; 6] = [0.3, 0.55, 0.4, 0.7, 0.25, 0.5];

fn ac1() -> Verdict {
    let reports: Vec<_> = RowId::ALL.par_iter().map(|&id| CouplingRow::designated(id).and_then(|r| r.verify())).collect();
    let mut worst: f64 = 0.0;
    for r in reports {
        let r = r.map_err(|e| e.to_string())?;
        if !r.enumerators_consistent {
            return Err(format!("row {}: enumerators disagree", r.id));
        }
        worst = worst.max(r.worst());
    }
    let msg = format!("{} rows, worst TV {worst:.3e}", RowId::ALL.len());
    if RowId::ALL.len() == 16 && worst < 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac2() -> Verdict {
    let records = run_suite(7).map_err(|e| e.to_string())?;
    let worst = records.iter().max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error)).ok_or("empty suite")?;
    let msg = format!("{} checks, worst rel err {:.3e} ({})", records.len(), worst.max_rel_error, worst.name);
    if worst.max_rel_error < 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn defect(pi: &Distribution, mut step: impl FnMut(usize, &mut Branching) -> usize) -> Result<f64, String> {
    let mut next = vec![0.0; pi.probs.len()];
    for (s, w) in pi.support() {
        for (t, k) in exact_outcomes(10_000_000, |r| step(s, r)).map_err(|e| e.to_string())? {
            next[t] += w * k;
        }
    }
    Ok(next.iter().zip(&pi.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn ac3() -> Verdict {
    let e = |e: couplings::Error| e.to_string();
    let mut worst: f64 = 0.0;
    for q in [2, 3] {
        for g in [Graph::triangle(), Graph::cycle(4)] {
            let g = with_couplings(g, &J).map_err(e)?;
            let n = g.vertex_count();
            let pi = exact_distribution(&spin_measure(&g, &SpinModel::Potts { j: g.j_values(), q }).map_err(e)?).map_err(e)?;
            let p = g.p_values();
            worst = worst.max(defect(&pi, |s, r| undigits(&sw_step(&g, &p, q, &digits(s, q, n), r), q))?);
        }
        for g in [Graph::theta(), Graph::complete(4)] {
            let len = g.edge_count();
            let x: Vec<f64> = J[..len].iter().map(|j| j / 2.0).collect();
            let pi = exact_distribution(&qflow_measure(&g, q, &x).map_err(e)?).map_err(e)?;
            worst = worst.max(defect(&pi, |s, r| loop_cluster_step(&g, &x, &ChainQ::from_index(q, len, s), r).index())?);
        }
    }
    let square = CubicalComplex::single_square();
    let cells = square.cell_count(2);
    let x: Vec<f64> = vec![0.35; cells];
    let space = Space::Chains { cells, q: 3 };
    let w = (0..space.size().ok_or("space too large")?).map(|i| square.q_flow_cell_weight(2, &x, &ChainQ::from_index(3, cells, i)).unwrap_or(0.0)).collect();
    let pi = Distribution::from_weights(space, w).map_err(e)?;
    let mut failure = None;
    worst = worst.max(defect(&pi, |s, r| match plaquette_lc_step(&square, 2, &x, &ChainQ::from_index(3, cells, s), r) {
        Ok(c) => c.index(),
        Err(err) => {
            failure = Some(err.to_string());
            s
        }
    })?);
    if let Some(f) = failure {
        return Err(f);
    }
    let msg = format!("worst |piK - pi| {worst:.3e}");
    if worst < 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

const DRAWS: usize = 1_000_000;

fn empirical(space: Space, mut draw: impl FnMut() -> usize) -> Result<Distribution, String> {
    let mut counts = vec![0.0; space.size().ok_or("space too large")?];
    for _ in 0..DRAWS {
        counts[draw()] += 1.0;
    }
    Distribution::from_weights(space, counts).map_err(|e| e.to_string())
}

fn uniform(space: Space, keep: impl Fn(usize) -> bool) -> Result<Distribution, String> {
    let size = space.size().ok_or("space too large")?;
    Distribution::from_weights(space, (0..size).map(|i| f64::from(u8::from(keep(i)))).collect()).map_err(|e| e.to_string())
}

fn boundary_is<'a>(g: &'a Graph, a: &VertexSet) -> impl Fn(usize) -> bool + 'a {
    let a = a.clone();
    move |m| g.boundary_gf2(&EdgeSet::from_mask(g.edge_count(), m as u64)) == a
}

/// TV between a million draws of one sampler and its exact law.
fn sampler_case(kind: usize, gi: usize, g: &Graph) -> Result<(String, f64), String> {
    let e = |e: couplings::Error| e.to_string();
    let len = g.edge_count();
    let edges = Space::Edges { edges: len };
    let all = g.all_edges();
    let j = g.j_values();
    let (a, b) = (g.vertex_set([0, 1]), g.vertex_set([1, 2]));
    let mut rng = chain_rng(2024, (kind * 3 + gi) as u64);
    let (label, emp, exact) = match kind {
        0 => ("UEG", empirical(edges, || sample_ueg(g, &all, &mut rng).to_mask() as usize)?, uniform(edges, boundary_is(g, &g.no_vertices()))?),
        1 => {
            let mut fail = None;
            let emp = empirical(edges, || match sample_ug_sources(g, &all, &a, &mut rng) {
                Ok(s) => s.to_mask() as usize,
                Err(err) => {
                    fail = Some(err.to_string());
                    0
                }
            })?;
            if let Some(f) = fail {
                return Err(f);
            }
            ("UG^A", emp, uniform(edges, boundary_is(g, &a))?)
        }
        2 => {
            let space = Space::Chains { cells: len, q: 3 };
            let emp = empirical(space, || sample_uniform_kernel(g, &all, 3, &mut rng).index())?;
            ("uniform kernel q=3", emp, uniform(space, |i| is_divergence_free(g, &ChainQ::from_index(3, len, i)))?)
        }
        3 => {
            let mut s = SingleCurrentSampler::new(g, &a, &j, LoopMethod::Auto, &mut rng).map_err(e)?;
            ("single current", empirical(edges, || s.sample(&mut rng).to_mask() as usize)?, traced_current_exact(g, &a, &j).map_err(e)?)
        }
        _ => {
            let mut s = DoubleCurrentSampler::new(g, &a, &b, &j, LoopMethod::Auto, &mut rng).map_err(e)?;
            let exact = union_measure(&traced_current_exact(g, &a, &j).map_err(e)?, &traced_current_exact(g, &b, &j).map_err(e)?).map_err(e)?;
            ("double current", empirical(edges, || s.sample(&mut rng).to_mask() as usize)?, exact)
        }
    };
    Ok((format!("{label} on {}", ["triangle", "C4", "K4"][gi]), tv_distance(&emp, &exact).map_err(e)?))
}

fn ac4() -> Verdict {
    let graphs: Vec<Graph> = [Graph::triangle(), Graph::cycle(4), Graph::complete(4)]
        .into_iter()
        .map(|g| with_couplings(g, &J).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let cases: Vec<(usize, usize)> = (0..5).flat_map(|k| (0..3).map(move |g| (k, g))).collect();
    let results: Vec<_> = cases.par_iter().map(|&(k, gi)| sampler_case(k, gi, &graphs[gi])).collect();
    let mut worst = (String::new(), 0.0);
    for r in results {
        let (label, tv) = r?;
        if tv >= worst.1 {
            worst = (label, tv);
        }
    }
    let msg = format!("15 cases at {DRAWS} draws, worst TV {:.4} ({})", worst.1, worst.0);
    if worst.1 < 0.02 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac5() -> Verdict {
    let g = Graph::torus(2, 1);
    let mut parts = Vec::new();
    for q in [2u32, 3, 5] {
        let c = winding_census(&g, q).map_err(|e| e.to_string())?;
        let want = (q - 1) as f64 / q as f64;
        if !c.exact || c.unwound_flows != 0 || c.winding_configs == 0 || c.min_fraction != want || c.max_fraction != want {
            return Err(format!("q={q}: {c:?}"));
        }
        parts.push(format!("q={q}: {} winding configs at {want:.4}", c.winding_configs));
    }
    Ok(parts.join("; "))
}

fn ac6() -> Verdict {
    let g = Graph::torus(2, 4);
    let chains = 4u64;
    let series: Vec<_> = (0..chains)
        .into_par_iter()
        .map(|c| run_torus_chain(&g, 3, 0.5, 100_000 / chains, 1000, &mut chain_rng(7, c)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let r = summarize_torus(3, 0.5, &series, 20);
    let msg = format!(
        "{} sweeps: flow {:.4}, (2/3)wrap {:.4}, combined SE {:.2e}, z {:.2}",
        r.sweeps, r.flow_nonzero.mean, r.lower_bound, r.combined_se, r.z_score
    );
    if r.holds && r.sweeps >= 100_000 && r.unwound_flows == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac7() -> Verdict {
    let reports = sprinkling_recovery(7).map_err(|e| e.to_string())?;
    let worst = reports.iter().map(|r| r.recovered.max(r.recomposed)).fold(0.0, f64::max);
    let msg = format!("{} inversions, worst TV {worst:.3e}", reports.len());
    if reports.iter().all(|r| r.passes(1e-10)) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_couplings")).args(args).output().map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)))
    }
}

fn files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        out.push((name, std::fs::read(&path).map_err(|e| e.to_string())?));
    }
    out.sort();
    Ok(out)
}

fn ac8() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (first, second) = (tmp.path().join("first"), tmp.path().join("second"));
    let s = |p: &Path| p.to_string_lossy().into_owned();
    run_cli(&["sample", "--row", "lc", "--q", "3", "--torus", "2,3", "--steps", "20000", "--chains", "2", "--seed", "11", "--out", &s(&first)])?;
    run_cli(&["sample", "--config", &s(&first.join("manifest.json")), "--out", &s(&second)])?;
    let (a, b) = (files(&first)?, files(&second)?);
    let bytes: usize = a.iter().map(|(_, d)| d.len()).sum();
    let msg = format!("{} files, {bytes} bytes", a.len());
    if a == b && a.len() >= 3 {
        Ok(msg)
    } else {
        Err(format!("outputs differ: {msg}"))
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1", "registry rows match their exact tables", ac1, Some(Duration::from_secs(60))),
        ("AC2", "identity suite", ac2, None),
        ("AC3", "exact kernels fix their stationary laws", ac3, None),
        ("AC4", "samplers against exact tables", ac4, Some(Duration::from_secs(300))),
        ("AC5", "winding fraction on the smallest torus", ac5, None),
        ("AC6", "flow versus wrapping on the 8x8 torus", ac6, Some(Duration::from_secs(600))),
        ("AC7", "sprinkling deconvolution", ac7, None),
        ("AC8", "sample rerun from its manifest", ac8, None),
    ];
    let mut failed = 0;
    for (id, what, check, budget) in criteria {
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let verdict = match (verdict, budget) {
            (Ok(m), Some(b)) if elapsed > b => Err(format!("{m}; over the {}s budget", b.as_secs())),
            (v, _) => v,
        };
        let (tag, msg) = match verdict {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("[{tag}] {id} {what}: {msg} [{:.2}s]", elapsed.as_secs_f64());
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
