//! Named instantiations of the coupling. Each row carries its spec together
//! with the marginals and conditionals the construction is supposed to
//! produce, built directly from the model definitions.

use super::{ConditionalSampler, CouplingSpec, Direction, Enumerator, Predicate};
use crate::chains::{is_divergence_free, sample_uniform_kernel, ChainQ};
use crate::error::{Error, Result};
use crate::gauge::{CubicalComplex, PlaquetteDefinition};
use crate::graph::{Coupling, EdgeParams, EdgeSet, Graph, VertexSet};
use crate::measures::{
    digits, double_current_exact, edge_measure, exact_distribution, intersect_measure, qflow_measure, spin_measure,
    traced_current_exact, tv_distance, undigits, union_measure, Distribution, EdgeModel, Space, SpinModel,
    SubgraphFamily,
};
use crate::rng::{exact_outcomes, Branching, Randomness};
use crate::samplers::{color_clusters, sample_bernoulli_in_fa, sample_ug_sources, sample_ueg, sprinkle, thin, REJECTION_CAP};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Leaf cap when a predicted conditional is obtained by exhausting a sampler.
const LEAF_LIMIT: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowId {
    SwendsenWang,
    LoopClusterIsing,
    XorDoubleCurrent,
    LoopCurrent,
    SwendsenWangSources,
    LoopClusterSources,
    XorDoubleCurrentSources,
    LoopCurrentSources,
    Partial,
    ConditionalPercolation,
    Upward,
    FlowLoopCluster,
    GaugeSwendsenWang,
    GaugeLoopCluster,
    DomainWall,
    LoopOnSplit,
}

impl RowId {
    pub const ALL: [RowId; 16] = [
        RowId::SwendsenWang,
        RowId::LoopClusterIsing,
        RowId::XorDoubleCurrent,
        RowId::LoopCurrent,
        RowId::SwendsenWangSources,
        RowId::LoopClusterSources,
        RowId::XorDoubleCurrentSources,
        RowId::LoopCurrentSources,
        RowId::Partial,
        RowId::ConditionalPercolation,
        RowId::Upward,
        RowId::FlowLoopCluster,
        RowId::GaugeSwendsenWang,
        RowId::GaugeLoopCluster,
        RowId::DomainWall,
        RowId::LoopOnSplit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RowId::SwendsenWang => "sw",
            RowId::LoopClusterIsing => "lc-ising",
            RowId::XorDoubleCurrent => "xor-dc",
            RowId::LoopCurrent => "loop-current",
            RowId::SwendsenWangSources => "sw-sources",
            RowId::LoopClusterSources => "lc-sources",
            RowId::XorDoubleCurrentSources => "xor-dc-sources",
            RowId::LoopCurrentSources => "loop-current-sources",
            RowId::Partial => "partial",
            RowId::ConditionalPercolation => "cond-perc",
            RowId::Upward => "upward",
            RowId::FlowLoopCluster => "lc",
            RowId::GaugeSwendsenWang => "gauge-sw",
            RowId::GaugeLoopCluster => "gauge-lc",
            RowId::DomainWall => "domain-wall",
            RowId::LoopOnSplit => "loop-on",
        }
    }
}

impl fmt::Display for RowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RowId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RowId::ALL.into_iter().find(|r| r.as_str() == s).ok_or_else(|| Error::UnknownRow(s.to_string()))
    }
}

/// Everything a row constructor may read. Ising-type rows take their
/// couplings from the graph's edge parameters; the other rows use the
/// scalar fields uniformly.
#[derive(Clone, Debug)]
pub struct RowInput {
    pub graph: Graph,
    pub complex: CubicalComplex,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub q: u32,
    pub family: SubgraphFamily,
    pub x: f64,
    pub p: f64,
    pub j: f64,
    pub k: usize,
    pub n: f64,
    pub m: f64,
}

/// Distinct couplings so that per-edge bookkeeping errors show up.
const DESIGNATED_J: [f64; 8] = [0.3, 0.45, 0.6, 0.25, 0.5, 0.35, 0.4, 0.55];

pub fn with_couplings(mut graph: Graph, j: &[f64]) -> Result<Graph> {
    let params = (0..graph.edge_count())
        .map(|e| EdgeParams::from_coupling(Coupling::J(j[e % j.len()])))
        .collect::<Result<Vec<_>>>()?;
    graph.set_params(params);
    Ok(graph)
}

/// Two triangles joined by a bridge: max degree 3, two disjoint loops.
pub fn two_triangles() -> Graph {
    Graph::new(6, vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).expect("valid graph")
}

impl RowInput {
    /// The small instance each row is verified on.
    pub fn designated(id: RowId) -> Result<Self> {
        let k4 = with_couplings(Graph::complete(4), &DESIGNATED_J)?;
        let mut input = RowInput {
            graph: k4,
            complex: CubicalComplex::torus_complex(2, 2)?,
            a: vec![],
            b: vec![],
            q: 2,
            family: SubgraphFamily::Forests,
            x: 0.4,
            p: 0.5,
            j: 0.4,
            k: 2,
            n: 2.0,
            m: 1.0,
        };
        match id {
            RowId::SwendsenWang => {
                input.graph = with_couplings(Graph::triangle(), &DESIGNATED_J)?;
                input.q = 3;
            }
            RowId::LoopClusterIsing | RowId::XorDoubleCurrent | RowId::LoopCurrent => {}
            RowId::SwendsenWangSources | RowId::LoopClusterSources => input.a = vec![0, 1],
            RowId::XorDoubleCurrentSources | RowId::LoopCurrentSources => {
                input.a = vec![0, 1];
                input.b = vec![1, 2];
            }
            RowId::Partial => input.x = 2.0,
            RowId::ConditionalPercolation => input.family = SubgraphFamily::Even,
            RowId::Upward => input.x = 2.0,
            RowId::FlowLoopCluster => {
                input.q = 3;
                input.x = 0.25;
            }
            RowId::GaugeSwendsenWang => {}
            RowId::GaugeLoopCluster => {
                input.q = 3;
                input.x = 0.3;
            }
            RowId::DomainWall => {
                input.complex = CubicalComplex::box_complex(&[2, 2])?;
                input.k = 1;
            }
            RowId::LoopOnSplit => {
                input.graph = two_triangles();
                input.x = 0.7;
            }
        }
        Ok(input)
    }

    fn sources(&self) -> Result<(VertexSet, VertexSet)> {
        let n = self.graph.vertex_count();
        if let Some(&v) = self.a.iter().chain(&self.b).find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange { vertex: v, count: n });
        }
        Ok((self.graph.vertex_set(self.a.iter().copied()), self.graph.vertex_set(self.b.iter().copied())))
    }

    fn describe(&self, id: RowId) -> String {
        let g = format!("graph V={} E={}", self.graph.vertex_count(), self.graph.edge_count());
        let c = format!("complex dims {:?}", (0..=self.complex.top_dim()).map(|k| self.complex.cell_count(k)).collect::<Vec<_>>());
        match id {
            RowId::SwendsenWang => format!("{g}, q={}", self.q),
            RowId::LoopClusterIsing | RowId::XorDoubleCurrent | RowId::LoopCurrent => g,
            RowId::SwendsenWangSources | RowId::LoopClusterSources => format!("{g}, A={:?}", self.a),
            RowId::XorDoubleCurrentSources | RowId::LoopCurrentSources => format!("{g}, A={:?}, B={:?}", self.a, self.b),
            RowId::Partial | RowId::Upward => format!("{g}, family={}, x={}, p={}", self.family.name(), self.x, self.p),
            RowId::ConditionalPercolation => format!("{g}, family={}, x={}", self.family.name(), self.x),
            RowId::FlowLoopCluster => format!("{g}, q={}, x={}", self.q, self.x),
            RowId::GaugeSwendsenWang => format!("{c}, k={}, q={}, p={}", self.k, self.q, self.p),
            RowId::GaugeLoopCluster => format!("{c}, k={}, q={}, x={}", self.k, self.q, self.x),
            RowId::DomainWall => format!("{c}, k={}, q={}, J={}", self.k, self.q, self.j),
            RowId::LoopOnSplit => format!("{g}, x={}, n={}, m={}", self.x, self.n, self.m),
        }
    }
}

type Marginal = Arc<dyn Fn() -> Result<Distribution> + Send + Sync>;
type Conditional = Arc<dyn Fn(usize) -> Result<Distribution> + Send + Sync>;

struct Built {
    spec: CouplingSpec,
    omega: Marginal,
    sigma: Marginal,
    given_omega: Conditional,
    given_eta: Conditional,
}

#[derive(Clone)]
pub struct CouplingRow {
    pub id: RowId,
    pub instance: String,
    pub spec: CouplingSpec,
    predicted_omega: Marginal,
    predicted_sigma: Marginal,
    predicted_given_omega: Conditional,
    predicted_given_eta: Conditional,
}

/// Outcome of checking one row against its predictions. All distances are
/// total variation.
#[derive(Clone, Debug, PartialEq)]
pub struct RowReport {
    pub id: RowId,
    pub instance: String,
    pub joint_omega: f64,
    pub joint_sigma: f64,
    pub predicted_omega: f64,
    pub predicted_sigma: f64,
    pub given_omega: f64,
    pub given_eta: f64,
    pub enumerators_consistent: bool,
}

impl RowReport {
    pub fn worst(&self) -> f64 {
        [self.joint_omega, self.joint_sigma, self.predicted_omega, self.predicted_sigma, self.given_omega, self.given_eta]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.enumerators_consistent && self.worst() < tolerance
    }
}

impl CouplingRow {
    pub fn build(id: RowId, input: &RowInput) -> Result<Self> {
        let built = match id {
            RowId::SwendsenWang => swendsen_wang(&input.graph, input.q)?,
            RowId::LoopClusterIsing | RowId::LoopClusterSources => {
                let (a, _) = input.sources()?;
                loop_cluster_sources(&input.graph, &a)?
            }
            RowId::XorDoubleCurrent | RowId::XorDoubleCurrentSources => {
                let (a, b) = input.sources()?;
                xor_double_current(&input.graph, &a, &b)?
            }
            RowId::LoopCurrent | RowId::LoopCurrentSources => {
                let (a, b) = input.sources()?;
                loop_current(&input.graph, &a, &b)?
            }
            RowId::SwendsenWangSources => {
                let (a, _) = input.sources()?;
                swendsen_wang_sources(&input.graph, &a)?
            }
            RowId::Partial => partial(&input.graph, input.family, input.x, input.p)?,
            RowId::ConditionalPercolation => conditional_percolation(&input.graph, input.family, input.x)?,
            RowId::Upward => upward(&input.graph, input.family, input.x, input.p)?,
            RowId::FlowLoopCluster => flow_loop_cluster(&input.graph, input.q, input.x)?,
            RowId::GaugeSwendsenWang => gauge_swendsen_wang(&input.complex, input.k, input.q, input.p)?,
            RowId::GaugeLoopCluster => gauge_loop_cluster(&input.complex, input.k, input.q, input.x)?,
            RowId::DomainWall => domain_wall(&input.complex, input.k, input.q, input.j)?,
            RowId::LoopOnSplit => loop_on_split(&input.graph, input.x, input.n, input.m)?,
        };
        Ok(Self {
            id,
            instance: input.describe(id),
            spec: built.spec,
            predicted_omega: built.omega,
            predicted_sigma: built.sigma,
            predicted_given_omega: built.given_omega,
            predicted_given_eta: built.given_eta,
        })
    }

    pub fn designated(id: RowId) -> Result<Self> {
        Self::build(id, &RowInput::designated(id)?)
    }

    pub fn predicted_omega(&self) -> Result<Distribution> {
        (self.predicted_omega)()
    }

    pub fn predicted_sigma(&self) -> Result<Distribution> {
        (self.predicted_sigma)()
    }

    pub fn predicted_given_omega(&self, omega: usize) -> Result<Distribution> {
        (self.predicted_given_omega)(omega)
    }

    pub fn predicted_given_eta(&self, eta: usize) -> Result<Distribution> {
        (self.predicted_given_eta)(eta)
    }

    /// Compares the joint's sums, the engine's marginals and conditionals
    /// with the predicted ones, on every configuration of positive mass.
    pub fn verify(&self) -> Result<RowReport> {
        let joint = self.spec.joint()?;
        let omega = self.spec.marginal_omega()?;
        let sigma = self.spec.marginal_sigma()?;
        let mut given_omega: f64 = 0.0;
        for (o, _) in omega.support() {
            given_omega = given_omega.max(tv_distance(&self.spec.conditional_given_omega(o)?, &self.predicted_given_omega(o)?)?);
        }
        let mut given_eta: f64 = 0.0;
        for (s, _) in sigma.support() {
            given_eta = given_eta.max(tv_distance(&self.spec.conditional_given_eta(s)?, &self.predicted_given_eta(s)?)?);
        }
        Ok(RowReport {
            id: self.id,
            instance: self.instance.clone(),
            joint_omega: tv_distance(&joint.omega_marginal()?, &omega)?,
            joint_sigma: tv_distance(&joint.sigma_marginal()?, &sigma)?,
            predicted_omega: tv_distance(&omega, &self.predicted_omega()?)?,
            predicted_sigma: tv_distance(&sigma, &self.predicted_sigma()?)?,
            given_omega,
            given_eta,
            enumerators_consistent: self.spec.check_enumerators()?,
        })
    }
}

// ---------------------------------------------------------------------------
// Small helpers on bitmask-indexed configurations.

fn edges_of(len: usize, mask: usize) -> EdgeSet {
    EdgeSet::from_mask(len, mask as u64)
}

fn mask_of(set: &EdgeSet) -> usize {
    set.to_mask() as usize
}

fn subsets_of(mask: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut s = mask;
    loop {
        out.push(s);
        if s == 0 {
            break;
        }
        s = (s - 1) & mask;
    }
    out.reverse();
    out
}

fn supersets_of(mask: usize, len: usize) -> Vec<usize> {
    let rest = ((1usize << len) - 1) & !mask;
    subsets_of(rest).into_iter().map(|s| s | mask).collect()
}

fn bernoulli_table(p: &[f64]) -> Vec<f64> {
    (0..1usize << p.len())
        .map(|m| (0..p.len()).map(|e| if m >> e & 1 == 1 { p[e] } else { 1.0 - p[e] }).product())
        .collect()
}

fn bernoulli(p: &[f64]) -> Result<Distribution> {
    Distribution::from_weights(Space::Edges { edges: p.len() }, bernoulli_table(p))
}

fn model(graph: &Graph, m: &EdgeModel) -> Result<Distribution> {
    exact_distribution(&edge_measure(graph, m)?)
}

/// ℙ_p ∪ δ_η.
fn sprinkled(p: &[f64], eta: usize) -> Result<Distribution> {
    let space = Space::Edges { edges: p.len() };
    union_measure(&bernoulli(p)?, &Distribution::point_mass(space, eta)?)
}

fn law_of(space: Space, run: impl FnMut(&mut Branching) -> usize) -> Result<Distribution> {
    let law: HashMap<usize, f64> = exact_outcomes(LEAF_LIMIT, run)?;
    let mut w = vec![0.0; space.size().ok_or(Error::SpaceMismatch)?];
    for (k, p) in law {
        w[k] += p;
    }
    Distribution::from_weights(space, w)
}

/// Uniform law on a list of configurations.
fn uniform_on(space: Space, items: impl IntoIterator<Item = usize>) -> Result<Distribution> {
    let mut w = vec![0.0; space.size().ok_or(Error::SpaceMismatch)?];
    for i in items {
        w[i] = 1.0;
    }
    Distribution::from_weights(space, w)
}

/// Masks of the edges on which σ is satisfied, for every σ.
fn satisfied_masks(graph: &Graph, q: u32) -> Result<Vec<usize>> {
    let n = graph.vertex_count();
    let size = Space::Spins { vertices: n, q }.guarded_size(crate::error::ENUMERATION_GUARD)?;
    Ok((0..size)
        .map(|s| {
            let sigma = digits(s, q, n);
            graph.edges().iter().enumerate().filter(|(_, &(u, v))| sigma[u] == sigma[v]).fold(0, |m, (e, _)| m | 1 << e)
        })
        .collect())
}

/// Spin configurations constant on the clusters of ω.
fn cluster_colorings(graph: &Graph, omega: &EdgeSet, q: u32) -> Vec<usize> {
    let (labels, k) = graph.cluster_labels(omega);
    (0..(q as usize).pow(k as u32))
        .map(|c| {
            let colors = digits(c, q, k);
            undigits(&labels.iter().map(|&l| colors[l]).collect::<Vec<_>>(), q)
        })
        .collect()
}

/// Subgraphs of ω with sources A, by the switching bijection.
fn with_sources(graph: &Graph, omega: &EdgeSet, sources: &VertexSet) -> Vec<usize> {
    let Ok(base) = graph.source_subgraph(omega, sources) else {
        return Vec::new();
    };
    let mut out = vec![base];
    for cycle in graph.cycle_space_basis(omega) {
        let shifted: Vec<EdgeSet> = out.iter().map(|f| f.symmetric_difference(&cycle)).collect();
        out.extend(shifted);
    }
    out.iter().map(mask_of).collect()
}

fn fa_mask(graph: &Graph, sources: &VertexSet) -> Result<Vec<bool>> {
    let len = graph.edge_count();
    (0..1usize << len).map(|m| graph.in_event_fa(&edges_of(len, m), sources)).collect()
}

fn boundary_masks(graph: &Graph) -> Vec<VertexSet> {
    let len = graph.edge_count();
    (0..1usize << len).map(|m| graph.boundary_gf2(&edges_of(len, m))).collect()
}

fn restricted_to(d: Distribution, keep: &[bool]) -> Result<Distribution> {
    d.conditioned(|i| keep[i])
}

fn sampler(f: impl Fn(usize, &mut dyn Randomness) -> Result<usize> + Send + Sync + 'static) -> ConditionalSampler {
    Arc::new(f)
}

fn check_edge_count(graph: &Graph) -> Result<()> {
    crate::error::guard("edges for joint enumeration", graph.edge_count() as u128, 20)
}

// ---------------------------------------------------------------------------
// Coloring rows: Ω = {0,1}^E, Σ = [q]^V, f(ω) = {σ : ω ⊂ S(σ)}.

fn coloring_spec(graph: &Graph, q: u32, rho: Vec<f64>) -> Result<(CouplingSpec, Arc<Vec<usize>>)> {
    let sat = Arc::new(satisfied_masks(graph, q)?);
    let (n, len) = (graph.vertex_count(), graph.edge_count());
    let predicate: Predicate = {
        let sat = sat.clone();
        Arc::new(move |o, s| o & !sat[s] == 0)
    };
    let forward: Enumerator = {
        let g = graph.clone();
        Arc::new(move |o| cluster_colorings(&g, &edges_of(len, o), q))
    };
    let fiber: Enumerator = {
        let sat = sat.clone();
        Arc::new(move |s| subsets_of(sat[s]))
    };
    let colorer = {
        let g = graph.clone();
        sampler(move |o, rng| Ok(undigits(&color_clusters(&g, &edges_of(len, o), q, rng), q)))
    };
    let spec = CouplingSpec::new(Space::Edges { edges: len }, Space::Spins { vertices: n, q }, rho, vec![1.0; (q as usize).pow(n as u32)], predicate)?
        .with_forward(forward)
        .with_fiber(fiber)
        .with_sampler(Direction::OmegaToEta, colorer);
    Ok((spec, sat))
}

fn coloring_law(graph: &Graph, q: u32) -> Conditional {
    let g = graph.clone();
    let space = Space::Spins { vertices: g.vertex_count(), q };
    Arc::new(move |o| {
        let omega = edges_of(g.edge_count(), o);
        law_of(space, |r| undigits(&color_clusters(&g, &omega, q, r), q))
    })
}

fn swendsen_wang(graph: &Graph, q: u32) -> Result<Built> {
    check_edge_count(graph)?;
    if q < 2 {
        return Err(Error::InvalidParameter("q >= 2".into()));
    }
    let p = graph.p_values();
    let (spec, sat) = coloring_spec(graph, q, bernoulli_table(&p))?;
    let spec = {
        let (sat, p) = (sat.clone(), p.clone());
        let len = graph.edge_count();
        spec.with_sampler(
            Direction::EtaToOmega,
            sampler(move |s, rng| Ok(mask_of(&thin(&edges_of(len, sat[s]), &p, rng)))),
        )
    };
    let (g1, g2, p1) = (graph.clone(), graph.clone(), p.clone());
    let j = graph.j_values();
    Ok(Built {
        spec,
        omega: Arc::new(move || model(&g1, &EdgeModel::RandomCluster { p: p1.clone(), q: q as f64 })),
        sigma: Arc::new(move || exact_distribution(&spin_measure(&g2, &SpinModel::Potts { j: j.clone(), q })?)),
        given_omega: coloring_law(graph, q),
        given_eta: Arc::new(move |s| bernoulli(&masked(&p, sat[s]))),
    })
}

fn masked(p: &[f64], mask: usize) -> Vec<f64> {
    p.iter().enumerate().map(|(e, &p)| if mask >> e & 1 == 1 { p } else { 0.0 }).collect()
}

fn swendsen_wang_sources(graph: &Graph, sources: &VertexSet) -> Result<Built> {
    check_edge_count(graph)?;
    let p = graph.p_values();
    let fa = Arc::new(fa_mask(graph, sources)?);
    let rho: Vec<f64> = bernoulli_table(&p).into_iter().enumerate().map(|(m, w)| if fa[m] { w } else { 0.0 }).collect();
    let (spec, sat) = coloring_spec(graph, 2, rho)?;
    let spec = {
        let (g, sat, p, a) = (graph.clone(), sat.clone(), p.clone(), sources.clone());
        spec.with_sampler(
            Direction::EtaToOmega,
            sampler(move |s, rng| Ok(mask_of(&sample_bernoulli_in_fa(&g, &masked(&p, sat[s]), &a, REJECTION_CAP, rng)?))),
        )
    };
    let (g1, g2, p1, fa1) = (graph.clone(), graph.clone(), p.clone(), fa.clone());
    let (j, a) = (graph.j_values(), sources.clone());
    Ok(Built {
        spec,
        omega: Arc::new(move || restricted_to(model(&g1, &EdgeModel::RandomCluster { p: p1.clone(), q: 2.0 })?, &fa1)),
        sigma: Arc::new(move || exact_distribution(&spin_measure(&g2, &SpinModel::IsingSources { j: j.clone(), sources: a.clone() })?)),
        given_omega: coloring_law(graph, 2),
        given_eta: Arc::new(move |s| restricted_to(bernoulli(&masked(&p, sat[s]))?, &fa)),
    })
}

fn xor_double_current(graph: &Graph, a: &VertexSet, b: &VertexSet) -> Result<Built> {
    check_edge_count(graph)?;
    let len = graph.edge_count();
    let j2: Vec<f64> = graph.j_values().iter().map(|j| 2.0 * j).collect();
    let c = a.symmetric_difference(b);
    let fa = Arc::new(fa_mask(graph, a)?);
    let rho = restricted_to(traced_current_exact(graph, &c, &j2)?, &fa)?.probs;
    let (spec, sat) = coloring_spec(graph, 2, rho)?;
    let (g1, g2, g3) = (graph.clone(), graph.clone(), graph.clone());
    let (a1, b1, a2, b2) = (a.clone(), b.clone(), a.clone(), b.clone());
    let (t, j) = (graph.t_values(), graph.j_values());
    Ok(Built {
        spec,
        omega: Arc::new(move || double_current_exact(&g1, &a1, &b1, &t)),
        sigma: Arc::new(move || {
            let m = if a2.is_empty() && b2.is_empty() {
                SpinModel::Xor { j: j.clone() }
            } else {
                SpinModel::XorSources { j: j.clone(), a: a2.clone(), b: b2.clone() }
            };
            exact_distribution(&spin_measure(&g2, &m)?)
        }),
        given_omega: coloring_law(graph, 2),
        given_eta: Arc::new(move |s| {
            let s_edges = edges_of(len, sat[s]);
            let (sub, kept) = g3.restrict(&s_edges);
            let sub_j: Vec<f64> = kept.iter().map(|&e| j2[e]).collect();
            let current = traced_current_exact(&sub, &c, &sub_j)?;
            let lifted = current.pushforward(Space::Edges { edges: len }, |m| {
                kept.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).fold(0, |acc, (_, &e)| acc | 1 << e)
            })?;
            restricted_to(lifted, &fa)
        }),
    })
}

// ---------------------------------------------------------------------------
// Source rows: Ω = {0,1}^E, Σ = {F : ∂F = A}, f(ω) = {F ⊂ ω : ∂F = A}.

fn sources_spec(graph: &Graph, sources: &VertexSet, rho: Vec<f64>) -> Result<CouplingSpec> {
    let len = graph.edge_count();
    let boundaries = boundary_masks(graph);
    let gamma: Vec<f64> = boundaries.iter().map(|b| if b == sources { 1.0 } else { 0.0 }).collect();
    let valid = Arc::new(gamma.iter().map(|&g| g > 0.0).collect::<Vec<bool>>());
    let predicate: Predicate = {
        let valid = valid.clone();
        Arc::new(move |o, s| valid[s] && s & !o == 0)
    };
    let forward: Enumerator = {
        let (g, a) = (graph.clone(), sources.clone());
        Arc::new(move |o| with_sources(&g, &edges_of(len, o), &a))
    };
    let fiber: Enumerator = Arc::new(move |s| if valid[s] { supersets_of(s, len) } else { Vec::new() });
    let uniform = {
        let (g, a) = (graph.clone(), sources.clone());
        sampler(move |o, rng| Ok(mask_of(&sample_ug_sources(&g, &edges_of(len, o), &a, rng)?)))
    };
    Ok(CouplingSpec::new(Space::Edges { edges: len }, Space::Edges { edges: len }, rho, gamma, predicate)?
        .with_forward(forward)
        .with_fiber(fiber)
        .with_sampler(Direction::OmegaToEta, uniform))
}

fn uniform_sources_law(graph: &Graph, sources: &VertexSet) -> Conditional {
    let (g, a) = (graph.clone(), sources.clone());
    Arc::new(move |o| {
        let omega = edges_of(g.edge_count(), o);
        law_of(Space::Edges { edges: g.edge_count() }, |r| sample_ug_sources(&g, &omega, &a, r).map(|f| mask_of(&f)).unwrap_or(usize::MAX))
    })
}

fn loop_cluster_sources(graph: &Graph, sources: &VertexSet) -> Result<Built> {
    check_edge_count(graph)?;
    let len = graph.edge_count();
    let (t, p) = (graph.t_values(), graph.p_values());
    let fa = Arc::new(fa_mask(graph, sources)?);
    let rho: Vec<f64> = bernoulli_table(&t).into_iter().enumerate().map(|(m, w)| if fa[m] { w } else { 0.0 }).collect();
    let spec = {
        let (g, t) = (graph.clone(), t.clone());
        sources_spec(graph, sources, rho)?
            .with_sampler(Direction::EtaToOmega, sampler(move |s, rng| Ok(mask_of(&sprinkle(&g, &edges_of(len, s), &t, rng)))))
    };
    let (g1, g2, a) = (graph.clone(), graph.clone(), sources.clone());
    let t1 = t.clone();
    Ok(Built {
        spec,
        omega: Arc::new(move || restricted_to(model(&g1, &EdgeModel::RandomCluster { p: p.clone(), q: 2.0 })?, &fa)),
        sigma: Arc::new(move || model(&g2, &EdgeModel::loop_o1(t1.clone(), a.clone()))),
        given_omega: uniform_sources_law(graph, sources),
        given_eta: Arc::new(move |s| sprinkled(&t, s)),
    })
}

fn loop_current(graph: &Graph, a: &VertexSet, b: &VertexSet) -> Result<Built> {
    check_edge_count(graph)?;
    let len = graph.edge_count();
    let t = graph.t_values();
    let t2: Vec<f64> = t.iter().map(|t| t * t).collect();
    let c = a.symmetric_difference(b);
    let fa = fa_mask(graph, a)?;
    let base = union_measure(&model(graph, &EdgeModel::loop_o1(t.clone(), c))?, &bernoulli(&t2)?)?;
    let rho: Vec<f64> = base.probs.iter().enumerate().map(|(m, &w)| if fa[m] { w } else { 0.0 }).collect();
    let loop_b = model(graph, &EdgeModel::loop_o1(t.clone(), b.clone()))?;
    let cdf: Arc<Vec<f64>> = Arc::new(loop_b.probs.iter().scan(0.0, |acc, &p| {
        *acc += p;
        Some(*acc)
    }).collect());
    let spec = {
        let (g, t2) = (graph.clone(), t2.clone());
        sources_spec(graph, a, rho)?.with_sampler(
            Direction::EtaToOmega,
            sampler(move |s, rng| {
                let lb = rng.categorical_cdf(&cdf);
                Ok(mask_of(&sprinkle(&g, &edges_of(len, s | lb), &t2, rng)))
            }),
        )
    };
    let (g1, g2, a1, b1, a2) = (graph.clone(), graph.clone(), a.clone(), b.clone(), a.clone());
    let t1 = t.clone();
    Ok(Built {
        spec,
        omega: Arc::new(move || double_current_exact(&g1, &a1, &b1, &t1)),
        sigma: Arc::new(move || model(&g2, &EdgeModel::loop_o1(t.clone(), a2.clone()))),
        given_omega: uniform_sources_law(graph, a),
        given_eta: Arc::new(move |s| {
            let rest = union_measure(&loop_b, &bernoulli(&t2)?)?;
            union_measure(&rest, &Distribution::point_mass(Space::Edges { edges: len }, s)?)
        }),
    })
}

// ---------------------------------------------------------------------------
// Sprinkling and thinning rows over a family Σ ⊂ {0,1}^E.

fn family_flags(graph: &Graph, family: SubgraphFamily) -> Arc<Vec<bool>> {
    let len = graph.edge_count();
    Arc::new((0..1usize << len).map(|m| family.contains(graph, &edges_of(len, m))).collect())
}

fn check_rate(name: &str, v: f64, open_upper: bool) -> Result<()> {
    let ok = v > 0.0 && v.is_finite() && (!open_upper || v < 1.0);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name}={v} out of range")))
    }
}

/// Shared spec for the downward rows: f(ω) = {η ∈ Σ : η ⊂ ω}.
fn downward_spec(graph: &Graph, in_family: &Arc<Vec<bool>>, rho: Vec<f64>, gamma: Vec<f64>, sprinkle_p: Vec<f64>) -> Result<CouplingSpec> {
    let len = graph.edge_count();
    let predicate: Predicate = {
        let fam = in_family.clone();
        Arc::new(move |o, s| fam[s] && s & !o == 0)
    };
    let forward: Enumerator = {
        let fam = in_family.clone();
        Arc::new(move |o| subsets_of(o).into_iter().filter(|&s| fam[s]).collect())
    };
    let fiber: Enumerator = {
        let fam = in_family.clone();
        Arc::new(move |s| if fam[s] { supersets_of(s, len) } else { Vec::new() })
    };
    let g = graph.clone();
    Ok(CouplingSpec::new(Space::Edges { edges: len }, Space::Edges { edges: len }, rho, gamma, predicate)?
        .with_forward(forward)
        .with_fiber(fiber)
        .with_sampler(Direction::EtaToOmega, sampler(move |s, rng| Ok(mask_of(&sprinkle(&g, &edges_of(len, s), &sprinkle_p, rng))))))
}

fn partial(graph: &Graph, family: SubgraphFamily, x: f64, p: f64) -> Result<Built> {
    check_edge_count(graph)?;
    check_rate("x", x, false)?;
    check_rate("p", p, true)?;
    let len = graph.edge_count();
    let fam = family_flags(graph, family);
    let gamma: Vec<f64> = (0..1usize << len).map(|m| if fam[m] { (x / p).powi(m.count_ones() as i32) } else { 0.0 }).collect();
    let spec = downward_spec(graph, &fam, bernoulli_table(&vec![p; len]), gamma, vec![p; len])?;
    let (g1, g2) = (graph.clone(), graph.clone());
    let retain = x / (p + x);
    Ok(Built {
        spec,
        omega: Arc::new(move || union_measure(&model(&g1, &EdgeModel::Family { family, x: vec![x; len] })?, &bernoulli(&vec![p; len])?)),
        sigma: Arc::new(move || model(&g2, &EdgeModel::Family { family, x: vec![x; len] })),
        given_omega: Arc::new(move |o| bernoulli(&vec![retain; len])?.conditioned(|s| fam[s] && s & !o == 0)),
        given_eta: Arc::new(move |s| sprinkled(&vec![p; len], s)),
    })
}

fn conditional_percolation(graph: &Graph, family: SubgraphFamily, x: f64) -> Result<Built> {
    check_edge_count(graph)?;
    check_rate("x", x, true)?;
    let len = graph.edge_count();
    let fam = family_flags(graph, family);
    let gamma: Vec<f64> = fam.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
    let mut spec = downward_spec(graph, &fam, bernoulli_table(&vec![x; len]), gamma, vec![x; len])?;
    if family == SubgraphFamily::Even {
        let g = graph.clone();
        spec = spec.with_sampler(Direction::OmegaToEta, sampler(move |o, rng| Ok(mask_of(&sample_ueg(&g, &edges_of(len, o), rng)))));
    }
    let (g1, g2) = (graph.clone(), graph.clone());
    let space = Space::Edges { edges: len };
    Ok(Built {
        spec,
        omega: Arc::new(move || union_measure(&model(&g1, &EdgeModel::Family { family, x: vec![x; len] })?, &bernoulli(&vec![x; len])?)),
        sigma: Arc::new(move || model(&g2, &EdgeModel::Family { family, x: vec![x; len] })),
        given_omega: Arc::new(move |o| uniform_on(space, subsets_of(o).into_iter().filter(|&s| fam[s]))),
        given_eta: Arc::new(move |s| sprinkled(&vec![x; len], s)),
    })
}

fn upward(graph: &Graph, family: SubgraphFamily, x: f64, p: f64) -> Result<Built> {
    check_edge_count(graph)?;
    check_rate("x", x, false)?;
    check_rate("p", p, true)?;
    let len = graph.edge_count();
    let fam = family_flags(graph, family);
    let gamma: Vec<f64> = (0..1usize << len).map(|m| if fam[m] { (x * (1.0 - p)).powi(m.count_ones() as i32) } else { 0.0 }).collect();
    let predicate: Predicate = {
        let fam = fam.clone();
        Arc::new(move |o, s| fam[s] && o & !s == 0)
    };
    let forward: Enumerator = {
        let fam = fam.clone();
        Arc::new(move |o| supersets_of(o, len).into_iter().filter(|&s| fam[s]).collect())
    };
    let fiber: Enumerator = {
        let fam = fam.clone();
        Arc::new(move |s| if fam[s] { subsets_of(s) } else { Vec::new() })
    };
    let spec = CouplingSpec::new(Space::Edges { edges: len }, Space::Edges { edges: len }, bernoulli_table(&vec![p; len]), gamma, predicate)?
        .with_forward(forward)
        .with_fiber(fiber)
        .with_sampler(Direction::EtaToOmega, sampler(move |s, rng| Ok(mask_of(&thin(&edges_of(len, s), &vec![p; len], rng)))));
    let (g1, g2) = (graph.clone(), graph.clone());
    let keep = x * (1.0 - p) / (1.0 + x * (1.0 - p));
    Ok(Built {
        spec,
        omega: Arc::new(move || intersect_measure(&model(&g1, &EdgeModel::Family { family, x: vec![x; len] })?, &bernoulli(&vec![p; len])?)),
        sigma: Arc::new(move || model(&g2, &EdgeModel::Family { family, x: vec![x; len] })),
        given_omega: Arc::new(move |o| bernoulli(&vec![keep; len])?.conditioned(|s| fam[s] && o & !s == 0)),
        given_eta: Arc::new(move |s| bernoulli(&masked(&vec![p; len], s))),
    })
}

// ---------------------------------------------------------------------------
// q-flow loop-cluster on a graph: Σ = ker ∂ ⊂ (Z/qZ)^E, f(ω) = ker ∂^ω.

/// Random-cluster edge weight matching a flow weight x at cluster weight q.
pub fn flow_to_cluster_p(x: f64, q: u32) -> f64 {
    q as f64 * x / (1.0 - x + q as f64 * x)
}

fn flow_loop_cluster(graph: &Graph, q: u32, x: f64) -> Result<Built> {
    check_edge_count(graph)?;
    check_rate("x", x, true)?;
    let len = graph.edge_count();
    let sigma_space = Space::Chains { cells: len, q };
    let size = sigma_space.guarded_size(crate::error::ENUMERATION_GUARD)?;
    let supports: Arc<Vec<Option<usize>>> = Arc::new(
        (0..size)
            .map(|i| {
                let eta = ChainQ::from_index(q, len, i);
                is_divergence_free(graph, &eta).then(|| mask_of(&eta.support()))
            })
            .collect(),
    );
    let kernel: Arc<Vec<(usize, usize)>> = Arc::new(supports.iter().enumerate().filter_map(|(i, s)| s.map(|s| (i, s))).collect());
    let gamma: Vec<f64> = supports.iter().map(|s| if s.is_some() { 1.0 } else { 0.0 }).collect();
    let predicate: Predicate = {
        let supports = supports.clone();
        Arc::new(move |o, s| supports[s].is_some_and(|m| m & !o == 0))
    };
    let forward: Enumerator = {
        let kernel = kernel.clone();
        Arc::new(move |o| kernel.iter().filter(|(_, m)| m & !o == 0).map(|&(i, _)| i).collect())
    };
    let fiber: Enumerator = {
        let supports = supports.clone();
        Arc::new(move |s| supports[s].map(|m| supersets_of(m, len)).unwrap_or_default())
    };
    let xs = vec![x; len];
    let spec = {
        let (g1, g2, xs, supports) = (graph.clone(), graph.clone(), xs.clone(), supports.clone());
        CouplingSpec::new(Space::Edges { edges: len }, sigma_space, bernoulli_table(&xs), gamma, predicate)?
            .with_forward(forward)
            .with_fiber(fiber)
            .with_sampler(Direction::OmegaToEta, sampler(move |o, rng| Ok(sample_uniform_kernel(&g1, &edges_of(len, o), q, rng).index())))
            .with_sampler(
                Direction::EtaToOmega,
                sampler(move |s, rng| Ok(mask_of(&sprinkle(&g2, &edges_of(len, supports[s].ok_or(Error::NotDivergenceFree)?), &xs, rng)))),
            )
    };
    let (g1, g2, g3) = (graph.clone(), graph.clone(), graph.clone());
    let p = vec![flow_to_cluster_p(x, q); len];
    let xs1 = xs.clone();
    Ok(Built {
        spec,
        omega: Arc::new(move || model(&g1, &EdgeModel::RandomCluster { p: p.clone(), q: q as f64 })),
        sigma: Arc::new(move || exact_distribution(&qflow_measure(&g2, q, &xs1)?)),
        given_omega: Arc::new(move |o| {
            let omega = edges_of(len, o);
            law_of(sigma_space, |r| sample_uniform_kernel(&g3, &omega, q, r).index())
        }),
        given_eta: Arc::new(move |s| sprinkled(&xs, mask_of(&ChainQ::from_index(q, len, s).support()))),
    })
}

// ---------------------------------------------------------------------------
// Cubical complexes.

fn check_cell_count(n: usize) -> Result<()> {
    crate::error::guard("k-cells for joint enumeration", n as u128, 20)
}

fn gauge_swendsen_wang(complex: &CubicalComplex, k: usize, q: u32, p: f64) -> Result<Built> {
    if k == 0 || k > complex.top_dim() {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={}", complex.top_dim())));
    }
    check_rate("p", p, true)?;
    let (nk, nf) = (complex.cell_count(k), complex.cell_count(k - 1));
    check_cell_count(nk)?;
    let sigma_space = Space::Chains { cells: nf, q };
    let size = sigma_space.guarded_size(crate::error::ENUMERATION_GUARD)?;
    let sat: Arc<Vec<usize>> = Arc::new(
        (0..size)
            .map(|s| {
                let d = complex.coboundary(k, &ChainQ::from_index(q, nf, s))?;
                Ok(d.values().iter().enumerate().filter(|(_, &v)| v == 0).fold(0, |m, (c, _)| m | 1 << c))
            })
            .collect::<Result<_>>()?,
    );
    let ps = vec![p; nk];
    let predicate: Predicate = {
        let sat = sat.clone();
        Arc::new(move |o, s| o & !sat[s] == 0)
    };
    let fiber: Enumerator = {
        let sat = sat.clone();
        Arc::new(move |s| subsets_of(sat[s]))
    };
    let spec = {
        let (sat, ps) = (sat.clone(), ps.clone());
        CouplingSpec::new(Space::Edges { edges: nk }, sigma_space, bernoulli_table(&ps), vec![1.0; size], predicate)?
            .with_fiber(fiber)
            .with_sampler(Direction::EtaToOmega, sampler(move |s, rng| Ok(mask_of(&thin(&edges_of(nk, sat[s]), &ps, rng)))))
    };
    let (c1, c2, c3) = (complex.clone(), complex.clone(), complex.clone());
    let ps1 = ps.clone();
    Ok(Built {
        spec,
        omega: Arc::new(move || {
            let w = (0..1usize << nk)
                .map(|o| c1.plaquette_rc_weight(k, q, &ps1, &c1.k_spanning(k, &edges_of(nk, o))?, PlaquetteDefinition::Cohomological))
                .collect::<Result<Vec<f64>>>()?;
            Distribution::from_weights(Space::Edges { edges: nk }, w)
        }),
        sigma: Arc::new(move || {
            let w = (0..size)
                .map(|s| {
                    let d = c2.coboundary(k, &ChainQ::from_index(q, nf, s))?;
                    Ok(d.values().iter().filter(|&&v| v != 0).map(|_| 1.0 - p).product())
                })
                .collect::<Result<Vec<f64>>>()?;
            Distribution::from_weights(sigma_space, w)
        }),
        given_omega: Arc::new(move |o| {
            let open = edges_of(nk, o);
            let mut keep = Vec::new();
            for s in 0..size {
                let d = c3.coboundary(k, &ChainQ::from_index(q, nf, s))?;
                if open.iter().all(|c| d.get(c) == 0) {
                    keep.push(s);
                }
            }
            uniform_on(sigma_space, keep)
        }),
        given_eta: Arc::new(move |s| bernoulli(&masked(&ps, sat[s]))),
    })
}

fn gauge_loop_cluster(complex: &CubicalComplex, k: usize, q: u32, x: f64) -> Result<Built> {
    if k == 0 || k > complex.top_dim() {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={}", complex.top_dim())));
    }
    check_rate("x", x, true)?;
    let nk = complex.cell_count(k);
    check_cell_count(nk)?;
    let sigma_space = Space::Chains { cells: nk, q };
    let size = sigma_space.guarded_size(crate::error::ENUMERATION_GUARD)?;
    let supports: Arc<Vec<Option<usize>>> = Arc::new(
        (0..size)
            .map(|i| {
                let eta = ChainQ::from_index(q, nk, i);
                Ok(complex.boundary(k, &eta)?.is_zero().then(|| mask_of(&eta.support())))
            })
            .collect::<Result<_>>()?,
    );
    let gamma: Vec<f64> = supports.iter().map(|s| if s.is_some() { 1.0 } else { 0.0 }).collect();
    let kernel: Arc<Vec<(usize, usize)>> = Arc::new(supports.iter().enumerate().filter_map(|(i, s)| s.map(|s| (i, s))).collect());
    let predicate: Predicate = {
        let supports = supports.clone();
        Arc::new(move |o, s| supports[s].is_some_and(|m| m & !o == 0))
    };
    let forward: Enumerator = {
        let kernel = kernel.clone();
        Arc::new(move |o| kernel.iter().filter(|(_, m)| m & !o == 0).map(|&(i, _)| i).collect())
    };
    let fiber: Enumerator = {
        let supports = supports.clone();
        Arc::new(move |s| supports[s].map(|m| supersets_of(m, nk)).unwrap_or_default())
    };
    let xs = vec![x; nk];
    let spec = {
        let (c, supports, xs) = (complex.clone(), supports.clone(), xs.clone());
        CouplingSpec::new(Space::Edges { edges: nk }, sigma_space, bernoulli_table(&xs), gamma, predicate)?
            .with_forward(forward)
            .with_fiber(fiber)
            .with_sampler(
                Direction::OmegaToEta,
                sampler(move |o, rng| {
                    let ker = crate::samplers::cell_kernel(&c, k, q, &edges_of(nk, o))?;
                    Ok(ker[rng.below(ker.len() as u32) as usize].index())
                }),
            )
            .with_sampler(
                Direction::EtaToOmega,
                sampler(move |s, rng| {
                    let base = supports[s].ok_or(Error::NotDivergenceFree)?;
                    Ok((0..nk).filter(|&c| base >> c & 1 == 0 && rng.bernoulli(xs[c])).fold(base, |m, c| m | 1 << c))
                }),
            )
    };
    let (c1, c2, c3) = (complex.clone(), complex.clone(), complex.clone());
    let p = vec![flow_to_cluster_p(x, q); nk];
    let xs1 = xs.clone();
    Ok(Built {
        spec,
        omega: Arc::new(move || {
            let w = (0..1usize << nk)
                .map(|o| c1.plaquette_rc_weight(k, q, &p, &c1.k_spanning(k, &edges_of(nk, o))?, PlaquetteDefinition::Homological))
                .collect::<Result<Vec<f64>>>()?;
            Distribution::from_weights(Space::Edges { edges: nk }, w)
        }),
        sigma: Arc::new(move || {
            let w = (0..size)
                .map(|s| match c2.q_flow_cell_weight(k, &xs1, &ChainQ::from_index(q, nk, s)) {
                    Ok(w) => Ok(w),
                    Err(Error::NotDivergenceFree) => Ok(0.0),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<f64>>>()?;
            Distribution::from_weights(sigma_space, w)
        }),
        given_omega: Arc::new(move |o| {
            let ker = crate::samplers::cell_kernel(&c3, k, q, &edges_of(nk, o))?;
            uniform_on(sigma_space, ker.iter().map(ChainQ::index))
        }),
        given_eta: Arc::new(move |s| sprinkled(&xs, mask_of(&ChainQ::from_index(q, nk, s).support()))),
    })
}

/// Ω: domain walls, (d−k)-chains in the image of ∂_{d−k+1}.
/// Σ: spins, (d−k+1)-chains (dual to (k−1)-cells).
fn domain_wall(complex: &CubicalComplex, k: usize, q: u32, j: f64) -> Result<Built> {
    if !complex.has_dual_pairing() {
        return Err(Error::MissingDualPairing);
    }
    let d = complex.ambient_dim();
    if k == 0 || k > d {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={d}")));
    }
    check_rate("J", j, false)?;
    let (spin_dim, wall_dim) = (d - k + 1, d - k);
    let (ns, nw) = (complex.cell_count(spin_dim), complex.cell_count(wall_dim));
    let omega_space = Space::Chains { cells: nw, q };
    let sigma_space = Space::Chains { cells: ns, q };
    let omega_size = omega_space.guarded_size(crate::error::ENUMERATION_GUARD)?;
    let sigma_size = sigma_space.guarded_size(crate::error::ENUMERATION_GUARD)?;
    let walls: Arc<Vec<usize>> = Arc::new(
        (0..sigma_size)
            .map(|s| Ok(complex.domain_wall_map(k, &ChainQ::from_index(q, ns, s))?.index()))
            .collect::<Result<_>>()?,
    );
    let mut preimages: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, &w) in walls.iter().enumerate() {
        preimages.entry(w).or_default().push(s);
    }
    let preimages = Arc::new(preimages);
    let x = (-2.0 * j).exp();
    let wall_weight = move |w: usize| x.powi(ChainQ::from_index(q, nw, w).support().count() as i32);
    let rho: Vec<f64> = (0..omega_size).map(|w| if preimages.contains_key(&w) { wall_weight(w) } else { 0.0 }).collect();
    let predicate: Predicate = {
        let walls = walls.clone();
        Arc::new(move |w, s| walls[s] == w)
    };
    let forward: Enumerator = {
        let pre = preimages.clone();
        Arc::new(move |w| pre.get(&w).cloned().unwrap_or_default())
    };
    let fiber: Enumerator = {
        let walls = walls.clone();
        Arc::new(move |s| vec![walls[s]])
    };
    let spec = {
        let walls = walls.clone();
        CouplingSpec::new(omega_space, sigma_space, rho, vec![1.0; sigma_size], predicate)?
            .with_forward(forward)
            .with_fiber(fiber)
            .with_sampler(Direction::EtaToOmega, sampler(move |s, _| Ok(walls[s])))
    };
    let (c1, c2, c3, c4) = (complex.clone(), complex.clone(), complex.clone(), complex.clone());
    Ok(Built {
        spec,
        omega: Arc::new(move || {
            let image = boundary_span(&c1, spin_dim, q)?;
            let w = (0..omega_size).map(|w| if image.contains(&w) { wall_weight(w) } else { 0.0 }).collect();
            Distribution::from_weights(omega_space, w)
        }),
        sigma: Arc::new(move || {
            let w = (0..sigma_size)
                .map(|s| {
                    let b = c2.boundary(spin_dim, &ChainQ::from_index(q, ns, s))?;
                    Ok(b.values().iter().map(|&v| if v == 0 { (2.0 * j).exp() } else { 1.0 }).product())
                })
                .collect::<Result<Vec<f64>>>()?;
            Distribution::from_weights(sigma_space, w)
        }),
        given_omega: Arc::new(move |w| {
            let target = ChainQ::from_index(q, nw, w);
            let mut fiber = Vec::new();
            for s in 0..sigma_size {
                if c3.boundary(spin_dim, &ChainQ::from_index(q, ns, s))? == target {
                    fiber.push(s);
                }
            }
            uniform_on(sigma_space, fiber)
        }),
        given_eta: Arc::new(move |s| Distribution::point_mass(omega_space, c4.boundary(spin_dim, &ChainQ::from_index(q, ns, s))?.index())),
    })
}

/// Im ∂_dim as a set of chain indices, by closing the boundaries of single
/// cells under addition.
fn boundary_span(complex: &CubicalComplex, dim: usize, q: u32) -> Result<HashSet<usize>> {
    let (n, m) = (complex.cell_count(dim), complex.cell_count(dim - 1));
    let gens: Vec<ChainQ> = (0..n)
        .map(|c| {
            let mut unit = ChainQ::zero(q, n);
            unit.set(c, 1);
            complex.boundary(dim, &unit)
        })
        .collect::<Result<_>>()?;
    let zero = ChainQ::zero(q, m);
    let mut seen: HashSet<usize> = HashSet::from([zero.index()]);
    let mut frontier = vec![zero];
    while let Some(chain) = frontier.pop() {
        for g in &gens {
            let values = chain.values().iter().zip(g.values()).map(|(a, b)| (a + b) % q).collect();
            let next = ChainQ::from_values(q, values)?;
            if seen.insert(next.index()) {
                frontier.push(next);
            }
        }
    }
    Ok(seen)
}

// ---------------------------------------------------------------------------
// Loop O(n) split: n = m + (n − m), Ω = Σ = even subgraphs.

fn loop_on_split(graph: &Graph, x: f64, n: f64, m: f64) -> Result<Built> {
    check_edge_count(graph)?;
    if !(0.0 < m && m < n) {
        return Err(Error::InvalidParameter("loop O(n) split needs 0 < m < n".into()));
    }
    check_rate("x", x, false)?;
    if let Some(v) = (0..graph.vertex_count()).find(|&v| graph.degree(v) > 3) {
        return Err(Error::DegreeViolation { vertex: v, degree: graph.degree(v), max: 3 });
    }
    let len = graph.edge_count();
    let loops = |mask: usize| crate::measures::loop_components(graph, &edges_of(len, mask)) as i32;
    let even = family_flags(graph, SubgraphFamily::Even);
    let rho: Vec<f64> = (0..1usize << len)
        .map(|o| if even[o] { (n - m).powi(loops(o)) * x.powi(o.count_ones() as i32) } else { 0.0 })
        .collect();
    let gamma: Vec<f64> = (0..1usize << len).map(|s| if even[s] { (m / (n - m)).powi(loops(s)) } else { 0.0 }).collect();
    let predicate: Predicate = {
        let even = even.clone();
        Arc::new(move |o, s| even[o] && even[s] && s & !o == 0)
    };
    let forward: Enumerator = {
        let even = even.clone();
        Arc::new(move |o| if even[o] { subsets_of(o).into_iter().filter(|&s| even[s]).collect() } else { Vec::new() })
    };
    let fiber: Enumerator = {
        let even = even.clone();
        Arc::new(move |s| if even[s] { supersets_of(s, len).into_iter().filter(|&o| even[o]).collect() } else { Vec::new() })
    };
    let red = m / n;
    let spec = {
        let g = graph.clone();
        CouplingSpec::new(Space::Edges { edges: len }, Space::Edges { edges: len }, rho, gamma, predicate)?
            .with_forward(forward)
            .with_fiber(fiber)
            .with_sampler(
                Direction::OmegaToEta,
                sampler(move |o, rng| {
                    Ok(loop_masks(&g, o).into_iter().filter(|_| rng.bernoulli(red)).fold(0, |acc, l| acc | l))
                }),
            )
    };
    let (g1, g2, g3, g4) = (graph.clone(), graph.clone(), graph.clone(), graph.clone());
    let space = Space::Edges { edges: len };
    Ok(Built {
        spec,
        omega: Arc::new(move || model(&g1, &EdgeModel::LoopOn { x: vec![x; len], n })),
        sigma: Arc::new(move || {
            let red_law = edge_measure(&g2, &EdgeModel::LoopOn { x: vec![x; len], n: m })?;
            let w = (0..1usize << len)
                .map(|s| {
                    if red_law.weights[s] == 0.0 {
                        return Ok(0.0);
                    }
                    let (rest, _) = g2.restrict(&edges_of(len, s).complement());
                    let z: f64 = edge_measure(&rest, &EdgeModel::LoopOn { x: vec![x; rest.edge_count()], n: n - m })?.weights.iter().sum();
                    Ok(red_law.weights[s] * z)
                })
                .collect::<Result<Vec<f64>>>()?;
            Distribution::from_weights(space, w)
        }),
        given_omega: Arc::new(move |o| {
            let ls = loop_masks(&g3, o);
            let mut w = vec![0.0; 1 << len];
            for pick in 0usize..1 << ls.len() {
                let chosen = (0..ls.len()).filter(|&i| pick >> i & 1 == 1).fold(0, |acc, i| acc | ls[i]);
                let kept = pick.count_ones() as i32;
                w[chosen] += red.powi(kept) * (1.0 - red).powi(ls.len() as i32 - kept);
            }
            Distribution::from_weights(space, w)
        }),
        given_eta: Arc::new(move |s| {
            let (rest, kept) = g4.restrict(&edges_of(len, s).complement());
            let blue = model(&rest, &EdgeModel::LoopOn { x: vec![x; rest.edge_count()], n: n - m })?;
            blue.pushforward(space, |b| kept.iter().enumerate().filter(|(i, _)| b >> i & 1 == 1).fold(s, |acc, (_, &e)| acc | 1 << e))
        }),
    })
}

/// Edge masks of the clusters of ω that contain edges.
fn loop_masks(graph: &Graph, omega: usize) -> Vec<usize> {
    let len = graph.edge_count();
    let (labels, k) = graph.cluster_labels(&edges_of(len, omega));
    let mut masks = vec![0usize; k];
    for e in 0..len {
        if omega >> e & 1 == 1 {
            masks[labels[graph.endpoints(e).0]] |= 1 << e;
        }
    }
    masks.into_iter().filter(|&m| m != 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chain_rng;

    #[test]
    fn ids_round_trip() {
        for id in RowId::ALL {
            assert_eq!(id.as_str().parse::<RowId>().unwrap(), id);
        }
        assert_eq!("nope".parse::<RowId>(), Err(Error::UnknownRow("nope".into())));
    }

    #[test]
    fn sw_single_edge_marginals() {
        let g = with_couplings(Graph::single_edge(), &[0.7]).unwrap();
        let row = CouplingRow::build(RowId::SwendsenWang, &RowInput { graph: g, q: 2, ..RowInput::designated(RowId::SwendsenWang).unwrap() }).unwrap();
        let p = 1.0 - (-1.4f64).exp();
        let omega = row.spec.marginal_omega().unwrap();
        assert!((omega.prob(1) - p / (2.0 - p)).abs() < 1e-15);
        let sigma = row.spec.marginal_sigma().unwrap();
        assert!((sigma.prob(0) + sigma.prob(3) - 1.0 / (2.0 - p)).abs() < 1e-15);
        assert!((sigma.prob(0) + sigma.prob(3) - 0.7f64.exp() / (0.7f64.exp() + (-0.7f64).exp())).abs() < 1e-15);
        // ω = {e} with disagreeing spins has no weight.
        assert_eq!(row.spec.joint_weight(1, 1), 0.0);
    }

    #[test]
    fn xor_single_edge_open_probability_is_t_squared() {
        let g = with_couplings(Graph::single_edge(), &[0.6]).unwrap();
        let input = RowInput { graph: g, ..RowInput::designated(RowId::XorDoubleCurrent).unwrap() };
        let row = CouplingRow::build(RowId::XorDoubleCurrent, &input).unwrap();
        assert!((row.spec.marginal_omega().unwrap().prob(1) - 0.6f64.tanh().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn flow_row_on_triangle_gives_cluster_weight_three() {
        let input = RowInput { graph: Graph::triangle(), q: 3, x: 0.25, ..RowInput::designated(RowId::FlowLoopCluster).unwrap() };
        let row = CouplingRow::build(RowId::FlowLoopCluster, &input).unwrap();
        let omega = row.spec.marginal_omega().unwrap();
        // p = 1/2 so every configuration weighs 3^κ.
        let z = 27.0 + 3.0 * 9.0 + 3.0 * 3.0 + 3.0;
        assert!((omega.prob(0) - 27.0 / z).abs() < 1e-15);
        assert!((omega.prob(7) - 3.0 / z).abs() < 1e-15);
        // A tree carries only the zero flow.
        let tree = row.spec.conditional_given_omega(0b011).unwrap();
        assert_eq!(tree.prob(0), 1.0);
    }

    #[test]
    fn partial_row_on_triangle_forests() {
        let input = RowInput { graph: Graph::triangle(), x: 2.0, p: 0.5, ..RowInput::designated(RowId::Partial).unwrap() };
        let row = CouplingRow::build(RowId::Partial, &input).unwrap();
        let sigma = row.spec.marginal_sigma().unwrap();
        // Forests of the triangle: ∅, three edges, three paths; weights 2^|F|.
        let z = 1.0 + 3.0 * 2.0 + 3.0 * 4.0;
        assert!((sigma.prob(0) - 1.0 / z).abs() < 1e-15);
        assert!((sigma.prob(0b011) - 4.0 / z).abs() < 1e-15);
        assert_eq!(sigma.prob(0b111), 0.0);
    }

    #[test]
    fn loop_on_square_red_probability() {
        let x = 0.8f64;
        let input = RowInput { graph: Graph::cycle(4), x, n: 2.0, m: 1.0, ..RowInput::designated(RowId::LoopOnSplit).unwrap() };
        let row = CouplingRow::build(RowId::LoopOnSplit, &input).unwrap();
        let sigma = row.spec.marginal_sigma().unwrap();
        assert!((sigma.prob(0b1111) - x.powi(4) / (1.0 + 2.0 * x.powi(4))).abs() < 1e-15);
    }

    #[test]
    fn out_of_support_conditioning_is_an_error() {
        let row = CouplingRow::designated(RowId::LoopClusterSources).unwrap();
        // The empty configuration is not in F_A for A = {0, 1}.
        assert_eq!(row.spec.conditional_given_omega(0), Err(Error::ZeroMass));
    }

    #[test]
    fn total_probability_for_sources() {
        let row = CouplingRow::designated(RowId::LoopClusterSources).unwrap();
        let input = RowInput::designated(RowId::LoopClusterSources).unwrap();
        let g = &input.graph;
        let a = g.vertex_set(input.a.iter().copied());
        let alt = union_measure(&bernoulli(&g.t_values()).unwrap(), &model(g, &EdgeModel::loop_o1(g.t_values(), a)).unwrap()).unwrap();
        assert!(tv_distance(&row.spec.marginal_omega().unwrap(), &alt).unwrap() < 1e-12);
    }

    #[test]
    fn every_designated_row_verifies() {
        for id in RowId::ALL {
            let report = CouplingRow::designated(id).unwrap().verify().unwrap();
            assert!(report.passes(1e-12), "{report:?}");
        }
    }

    #[test]
    fn direct_samplers_stay_in_support() {
        let mut rng = chain_rng(3, 0);
        for id in RowId::ALL {
            let row = CouplingRow::designated(id).unwrap();
            let sigma = row.spec.marginal_sigma().unwrap();
            for _ in 0..20 {
                let s = sigma.draw(&mut rng);
                let o = row.spec.sample_two_step(Direction::EtaToOmega, s, &mut rng).unwrap();
                assert!(row.spec.joint_weight(o, s) > 0.0, "{id}");
                let s2 = row.spec.sample_two_step(Direction::OmegaToEta, o, &mut rng).unwrap();
                assert!(row.spec.joint_weight(o, s2) > 0.0, "{id}");
            }
        }
    }
}
