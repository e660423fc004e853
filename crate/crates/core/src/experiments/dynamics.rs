use crate::chains::{flow_observable, torus_hyperplane, ChainQ};
use crate::coupling::{CouplingRow, CouplingSpec, Direction, RowId, RowInput};
use crate::error::Result;
use crate::gauge::{CellChainQ, CubicalComplex};
use crate::graph::{EdgeSet, Graph, VertexSet};
use crate::measures::{Space, SubgraphFamily};
use crate::rng::Randomness;
use crate::samplers::{loop_cluster_pair, plaquette_lc_pair, sample_ug_sources, sprinkle, sw_pair};

/// One named observable recorded after a step.
pub type Observation = (&'static str, f64);

/// The Markov chain run by `sample` for a registry row. Rows with a
/// dedicated move use it directly; every other row alternates the two
/// conditional draws of its coupling, starting from an exact joint draw.
pub enum RowChain {
    Potts { graph: Graph, p: Vec<f64>, q: u32, sigma: Vec<u32>, omega: EdgeSet },
    Currents { graph: Graph, t: Vec<f64>, sources: VertexSet, eta: EdgeSet, omega: EdgeSet },
    Flow { graph: Graph, x: Vec<f64>, eta: ChainQ, omega: EdgeSet, hyperplane: Option<VertexSet> },
    Plaquette { complex: CubicalComplex, k: usize, x: Vec<f64>, eta: CellChainQ, omega: EdgeSet },
    Alternating { spec: CouplingSpec, omega: usize, eta: usize },
}

fn on_torus(graph: &Graph) -> bool {
    graph.geometry().is_some_and(|g| g.period.is_some())
}

impl RowChain {
    pub fn new<R: Randomness>(id: RowId, input: &RowInput, rng: &mut R) -> Result<Self> {
        let graph = input.graph.clone();
        let len = graph.edge_count();
        Ok(match id {
            RowId::SwendsenWang => RowChain::Potts { p: graph.p_values(), q: input.q, sigma: vec![0; graph.vertex_count()], omega: graph.no_edges(), graph },
            RowId::LoopClusterIsing | RowId::LoopClusterSources => {
                let sources = graph.vertex_set(input.a.iter().copied());
                let eta = graph.source_subgraph(&graph.all_edges(), &sources)?;
                RowChain::Currents { t: graph.t_values(), sources, omega: eta.clone(), eta, graph }
            }
            RowId::ConditionalPercolation if input.family == SubgraphFamily::Even => {
                RowChain::Currents { t: vec![input.x; len], sources: graph.no_vertices(), eta: graph.no_edges(), omega: graph.no_edges(), graph }
            }
            RowId::FlowLoopCluster => {
                let hyperplane = if on_torus(&graph) { Some(torus_hyperplane(&graph, 0, 0)?) } else { None };
                RowChain::Flow { x: vec![input.x; len], eta: ChainQ::zero(input.q, len), omega: graph.no_edges(), hyperplane, graph }
            }
            RowId::GaugeLoopCluster => {
                let cells = input.complex.cell_count(input.k);
                RowChain::Plaquette {
                    complex: input.complex.clone(),
                    k: input.k,
                    x: vec![input.x; cells],
                    eta: ChainQ::zero(input.q, cells),
                    omega: EdgeSet::empty(cells),
                }
            }
            _ => {
                let spec = CouplingRow::build(id, input)?.spec;
                let eta = spec.marginal_sigma()?.draw(rng);
                let omega = spec.sample_two_step(Direction::EtaToOmega, eta, rng)?;
                RowChain::Alternating { spec, omega, eta }
            }
        })
    }

    pub fn step<R: Randomness>(&mut self, rng: &mut R) -> Result<()> {
        match self {
            RowChain::Potts { graph, p, q, sigma, omega } => {
                let (bonds, next) = sw_pair(graph, p, *q, sigma, rng);
                *omega = bonds;
                *sigma = next;
            }
            RowChain::Currents { graph, t, sources, eta, omega } => {
                *omega = sprinkle(graph, eta, t, rng);
                *eta = sample_ug_sources(graph, omega, sources, rng)?;
            }
            RowChain::Flow { graph, x, eta, omega, .. } => {
                let (bonds, next) = loop_cluster_pair(graph, x, eta, rng);
                *omega = bonds;
                *eta = next;
            }
            RowChain::Plaquette { complex, k, x, eta, omega } => {
                let (cells, next) = plaquette_lc_pair(complex, *k, x, eta, rng)?;
                *omega = cells;
                *eta = next;
            }
            RowChain::Alternating { spec, omega, eta } => {
                *omega = spec.sample_two_step(Direction::EtaToOmega, *eta, rng)?;
                *eta = spec.sample_two_step(Direction::OmegaToEta, *omega, rng)?;
            }
        }
        Ok(())
    }

    pub fn observe(&self) -> Result<Vec<Observation>> {
        Ok(match self {
            RowChain::Potts { graph, sigma, omega, .. } => {
                let satisfied = graph.edges().iter().filter(|&&(u, v)| sigma[u] == sigma[v]).count();
                let zeros = sigma.iter().filter(|&&s| s == 0).count();
                vec![
                    ("open_edges", omega.count() as f64),
                    ("clusters", graph.cluster_labels(omega).1 as f64),
                    ("satisfied_edges", satisfied as f64),
                    ("color0_fraction", zeros as f64 / sigma.len().max(1) as f64),
                ]
            }
            RowChain::Currents { graph, eta, omega, .. } => vec![
                ("open_edges", omega.count() as f64),
                ("clusters", graph.cluster_labels(omega).1 as f64),
                ("current_edges", eta.count() as f64),
            ],
            RowChain::Flow { graph, eta, omega, hyperplane, .. } => {
                let mut out = vec![
                    ("flow_support", eta.support().count() as f64),
                    ("open_edges", omega.count() as f64),
                    ("clusters", graph.cluster_labels(omega).1 as f64),
                ];
                if let Some(h) = hyperplane {
                    out.push(("flow_nonzero", f64::from(u8::from(flow_observable(graph, eta, h, 0)? != 0))));
                    out.push(("wraps", f64::from(u8::from(graph.winding_cycle(omega, Some(0))?.is_some()))));
                }
                out
            }
            RowChain::Plaquette { eta, omega, .. } => vec![("flow_support", eta.support().count() as f64), ("open_cells", omega.count() as f64)],
            RowChain::Alternating { spec, omega, eta } => {
                let mut out = vec![("omega_index", *omega as f64), ("eta_index", *eta as f64)];
                if let Space::Edges { edges } = spec.omega_space() {
                    out.push(("omega_open", EdgeSet::from_mask(edges, *omega as u64).count() as f64));
                }
                out
            }
        })
    }
}
