use super::stats::{batch_averages, pooled, BatchMeans, Proportion};
use crate::chains::{flow_observable, is_divergence_free, torus_hyperplane, ChainQ};
use crate::coupling::flow_to_cluster_p;
use crate::error::{guard, Error, Result, ENUMERATION_GUARD};
use crate::graph::{EdgeSet, Graph, VertexSet};
use crate::measures::{edge_measure, exact_distribution, qflow_measure, EdgeModel};
use crate::rng::Randomness;
use crate::samplers::loop_cluster_pair;
use serde::Serialize;

/// The flow is measured across the hyperplane {coordinate 0 = 0}.
pub const FLOW_DIRECTION: usize = 0;

fn require_torus(graph: &Graph) -> Result<()> {
    match graph.geometry() {
        Some(g) if g.period.is_some() => Ok(()),
        _ => Err(Error::MissingGeometry),
    }
}

fn hyperplane(graph: &Graph) -> Result<VertexSet> {
    torus_hyperplane(graph, FLOW_DIRECTION, 0)
}

/// Exact conditional law of the flow given a winding ω, over every ω.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindingCensus {
    pub q: u32,
    /// Configurations with a cycle winding in the flow direction.
    pub winding_configs: usize,
    /// Those whose extracted cycle winds exactly once.
    pub winding_once_configs: usize,
    /// Whether |{η ∈ ker ∂^ω : F(η) ≠ 0}| · q = |ker ∂^ω| · (q − 1) for all.
    pub exact: bool,
    pub min_fraction: f64,
    pub max_fraction: f64,
    /// Non-winding configurations carrying a flow with F ≠ 0 (must be 0).
    pub unwound_flows: usize,
}

/// Enumerates every q-chain once, then sums kernel and nonzero-flow counts
/// over subsets for each ω.
pub fn winding_census(graph: &Graph, q: u32) -> Result<WindingCensus> {
    require_torus(graph)?;
    let len = graph.edge_count();
    guard("torus edges for the census", len as u128, 20)?;
    let chains = (q as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    guard("chains for the census", chains, ENUMERATION_GUARD)?;
    let h = hyperplane(graph)?;
    let mut kernel = vec![0u64; 1 << len];
    let mut nonzero = vec![0u64; 1 << len];
    for i in 0..chains as usize {
        let eta = ChainQ::from_index(q, len, i);
        if is_divergence_free(graph, &eta) {
            let s = eta.support().to_mask() as usize;
            kernel[s] += 1;
            if flow_observable(graph, &eta, &h, FLOW_DIRECTION)? != 0 {
                nonzero[s] += 1;
            }
        }
    }
    for e in 0..len {
        for m in 0..1usize << len {
            if m >> e & 1 == 1 {
                kernel[m] += kernel[m ^ 1 << e];
                nonzero[m] += nonzero[m ^ 1 << e];
            }
        }
    }
    let mut census = WindingCensus {
        q,
        winding_configs: 0,
        winding_once_configs: 0,
        exact: true,
        min_fraction: f64::INFINITY,
        max_fraction: f64::NEG_INFINITY,
        unwound_flows: 0,
    };
    for m in 0..1usize << len {
        let omega = EdgeSet::from_mask(len, m as u64);
        match graph.winding_cycle(&omega, Some(FLOW_DIRECTION))? {
            Some(cycle) => {
                census.winding_configs += 1;
                census.winding_once_configs += usize::from(cycle.winding[FLOW_DIRECTION].abs() == 1);
                census.exact &= nonzero[m] * q as u64 == kernel[m] * (q as u64 - 1);
                let fraction = nonzero[m] as f64 / kernel[m] as f64;
                census.min_fraction = census.min_fraction.min(fraction);
                census.max_fraction = census.max_fraction.max(fraction);
            }
            None => census.unwound_flows += usize::from(nonzero[m] > 0),
        }
    }
    Ok(census)
}

/// Both sides of ℓ^q[F ≠ 0] ≥ (q−1)/q · φ^q[wrap], computed by enumeration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusExactReport {
    pub q: u32,
    pub x: f64,
    pub cluster_p: f64,
    pub flow_nonzero: f64,
    pub wrap_probability: f64,
    pub wrap_once_probability: f64,
    pub lower_bound: f64,
    pub holds: bool,
    pub census: WindingCensus,
}

pub fn torus_exact(graph: &Graph, q: u32, x: f64) -> Result<TorusExactReport> {
    require_torus(graph)?;
    if q < 2 || !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!("need q >= 2 and x in (0,1), got q={q}, x={x}")));
    }
    let len = graph.edge_count();
    let h = hyperplane(graph)?;
    let flows = exact_distribution(&qflow_measure(graph, q, &vec![x; len])?)?;
    let mut flow_nonzero = 0.0;
    for (i, pr) in flows.support() {
        if flow_observable(graph, &ChainQ::from_index(q, len, i), &h, FLOW_DIRECTION)? != 0 {
            flow_nonzero += pr;
        }
    }
    let p = flow_to_cluster_p(x, q);
    let clusters = exact_distribution(&edge_measure(graph, &EdgeModel::RandomCluster { p: vec![p; len], q: q as f64 })?)?;
    let (mut wrap, mut once) = (0.0, 0.0);
    for (m, pr) in clusters.support() {
        if let Some(cycle) = graph.winding_cycle(&EdgeSet::from_mask(len, m as u64), Some(FLOW_DIRECTION))? {
            wrap += pr;
            if cycle.winding[FLOW_DIRECTION].abs() == 1 {
                once += pr;
            }
        }
    }
    let lower_bound = (q - 1) as f64 / q as f64 * wrap;
    Ok(TorusExactReport {
        q,
        x,
        cluster_p: p,
        flow_nonzero,
        wrap_probability: wrap,
        wrap_once_probability: once,
        lower_bound,
        holds: flow_nonzero >= lower_bound - 1e-12,
        census: winding_census(graph, q)?,
    })
}

/// Per-sweep indicators from one loop-cluster chain.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TorusSeries {
    pub flow_nonzero: Vec<f64>,
    pub wraps: Vec<f64>,
    pub wraps_once: Vec<f64>,
    /// Sweeps where F(η) ≠ 0 although ω does not wrap.
    pub unwound_flows: u64,
}

/// Runs the loop-cluster chain from the zero flow. Each sweep records the
/// coupled pair (ω, η) it produces.
pub fn run_torus_chain<R: Randomness + ?Sized>(graph: &Graph, q: u32, x: f64, sweeps: u64, burn_in: u64, rng: &mut R) -> Result<TorusSeries> {
    require_torus(graph)?;
    if q < 2 || !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!("need q >= 2 and x in (0,1), got q={q}, x={x}")));
    }
    let len = graph.edge_count();
    let xs = vec![x; len];
    let h = hyperplane(graph)?;
    let mut eta = ChainQ::zero(q, len);
    for _ in 0..burn_in {
        eta = loop_cluster_pair(graph, &xs, &eta, rng).1;
    }
    let mut series = TorusSeries::default();
    for _ in 0..sweeps {
        let (omega, next) = loop_cluster_pair(graph, &xs, &eta, rng);
        eta = next;
        let flow = flow_observable(graph, &eta, &h, FLOW_DIRECTION)? != 0;
        let cycle = graph.winding_cycle(&omega, Some(FLOW_DIRECTION))?;
        if flow && cycle.is_none() {
            series.unwound_flows += 1;
        }
        series.flow_nonzero.push(f64::from(u8::from(flow)));
        series.wraps.push(f64::from(u8::from(cycle.is_some())));
        series.wraps_once.push(f64::from(u8::from(cycle.is_some_and(|c| c.winding[FLOW_DIRECTION].abs() == 1))));
    }
    Ok(series)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusStatReport {
    pub q: u32,
    pub x: f64,
    pub chains: usize,
    pub sweeps: u64,
    pub flow_nonzero: BatchMeans,
    pub wraps: BatchMeans,
    pub wraps_once: BatchMeans,
    pub flow_interval: Proportion,
    pub wrap_interval: Proportion,
    /// (q−1)/q times the wrap estimate.
    pub lower_bound: f64,
    /// sqrt(se_flow² + ((q−1)/q)² se_wrap²).
    pub combined_se: f64,
    /// flow − lower_bound in units of the combined standard error.
    pub z_score: f64,
    /// flow > lower_bound − 3 combined SE.
    pub holds: bool,
    /// Same check with the extracted-cycle wrap statistic.
    pub holds_once: bool,
    pub unwound_flows: u64,
}

/// Pools `batches` batch means from every chain, in chain order.
pub fn summarize_torus(q: u32, x: f64, chains: &[TorusSeries], batches: usize) -> TorusStatReport {
    let pool = |pick: fn(&TorusSeries) -> &Vec<f64>| -> BatchMeans {
        let averages: Vec<f64> = chains.iter().flat_map(|c| batch_averages(pick(c), batches)).collect();
        pooled(&averages)
    };
    let flow = pool(|c| &c.flow_nonzero);
    let wraps = pool(|c| &c.wraps);
    let once = pool(|c| &c.wraps_once);
    let count = |pick: fn(&TorusSeries) -> &Vec<f64>| chains.iter().map(|c| pick(c).iter().sum::<f64>() as u64).sum::<u64>();
    let sweeps: u64 = chains.iter().map(|c| c.flow_nonzero.len() as u64).sum();
    let factor = (q - 1) as f64 / q as f64;
    let combined = |w: &BatchMeans| (flow.std_error.powi(2) + (factor * w.std_error).powi(2)).sqrt();
    let lower_bound = factor * wraps.mean;
    let combined_se = combined(&wraps);
    TorusStatReport {
        q,
        x,
        chains: chains.len(),
        sweeps,
        flow_nonzero: flow,
        wraps,
        wraps_once: once,
        flow_interval: Proportion::new(count(|c| &c.flow_nonzero), sweeps),
        wrap_interval: Proportion::new(count(|c| &c.wraps), sweeps),
        lower_bound,
        combined_se,
        z_score: (flow.mean - lower_bound) / combined_se,
        holds: flow.mean > lower_bound - 3.0 * combined_se,
        holds_once: flow.mean > factor * once.mean - 3.0 * combined(&once),
        unwound_flows: chains.iter().map(|c| c.unwound_flows).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chain_rng;

    #[test]
    fn smallest_torus_fractions_are_exact() {
        let g = Graph::torus(2, 1);
        for q in [2, 3, 5] {
            let c = winding_census(&g, q).unwrap();
            assert!(c.exact, "{c:?}");
            assert!(c.winding_configs > 0);
            assert_eq!(c.unwound_flows, 0);
            let want = (q - 1) as f64 / q as f64;
            assert!((c.min_fraction - want).abs() < 1e-15 && (c.max_fraction - want).abs() < 1e-15);
        }
    }

    #[test]
    fn two_edge_winding_cycle_q3() {
        let g = Graph::torus(2, 1);
        // edges 0 and 2 are the two horizontal edges leaving vertices 0 and 1
        let h: Vec<usize> = (0..g.edge_count()).filter(|&e| g.geometry().unwrap().displacement[e][0] == 1 && g.geometry().unwrap().coords[g.endpoints(e).0][1] == 0).collect();
        assert_eq!(h.len(), 2);
        let omega = EdgeSet::from_indices(g.edge_count(), h.iter().copied());
        let mut kernel = 0;
        let mut nonzero = 0;
        let plane = hyperplane(&g).unwrap();
        for i in 0..3usize.pow(8) {
            let eta = ChainQ::from_index(3, 8, i);
            if eta.support().is_subset(&omega) && is_divergence_free(&g, &eta) {
                kernel += 1;
                nonzero += usize::from(flow_observable(&g, &eta, &plane, 0).unwrap() != 0);
            }
        }
        assert_eq!((kernel, nonzero), (3, 2));
    }

    #[test]
    fn exact_pipeline_on_smallest_torus() {
        let g = Graph::torus(2, 1);
        for q in [2, 3, 5] {
            let r = torus_exact(&g, q, 0.5).unwrap();
            assert!(r.holds);
            // a wrap-free ω only carries zero-flux flows, so the bound is tight
            assert!((r.flow_nonzero - r.lower_bound).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn non_torus_rejected() {
        assert_eq!(winding_census(&Graph::triangle(), 2).unwrap_err(), Error::MissingGeometry);
        let mut rng = chain_rng(1, 0);
        assert!(run_torus_chain(&Graph::grid(3, 3), 3, 0.5, 10, 0, &mut rng).is_err());
    }

    #[test]
    fn short_chain_is_consistent() {
        let g = Graph::torus(2, 2);
        let mut rng = chain_rng(3, 0);
        let s = run_torus_chain(&g, 3, 0.5, 2000, 100, &mut rng).unwrap();
        assert_eq!(s.unwound_flows, 0);
        let r = summarize_torus(3, 0.5, &[s], 20);
        assert!(r.holds, "{r:?}");
    }
}
