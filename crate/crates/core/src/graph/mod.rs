//! Finite multigraphs with per-edge couplings, and the GF(2) bookkeeping of
//! bond configurations on them.

mod bits;
mod builders;
mod dual;
mod io;
mod topology;
mod union_find;

pub use bits::{EdgeSet, VertexSet};
pub use dual::PlanarDualPairing;
pub use io::{parse_graph, read_graph_file, write_graph};
pub use topology::{SpanningForest, WindingCycle};
pub use union_find::{UnionFind, WrapUnionFind};

use crate::error::{Error, Result};

/// The one parameter an edge was specified with; the rest are derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coupling {
    J(f64),
    T(f64),
    P(f64),
    X(f64),
}

/// Per-edge parameters. For ferromagnetic input `t = tanh J`,
/// `p = 1 - e^{-2J} = 2t/(1+t)` and the loop weight `x` defaults to `t`.
/// An antiferromagnetic loop weight (`t` or `x` above 1) leaves `j` and `p`
/// as NaN since no real coupling produces it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeParams {
    pub j: f64,
    pub t: f64,
    pub p: f64,
    pub x: f64,
}

impl EdgeParams {
    pub fn from_coupling(c: Coupling) -> Result<Self> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what}={v}")));
        match c {
            Coupling::J(j) => {
                if !(j.is_finite() && j > 0.0) {
                    return bad("J", j);
                }
                let t = j.tanh();
                Ok(Self { j, t, p: -(-2.0 * j).exp_m1(), x: t })
            }
            Coupling::T(t) | Coupling::X(t) => {
                let key = if matches!(c, Coupling::T(_)) { "t" } else { "x" };
                if !(t.is_finite() && t > 0.0 && t != 1.0) {
                    return bad(key, t);
                }
                if t < 1.0 {
                    Ok(Self { j: t.atanh(), t, p: 2.0 * t / (1.0 + t), x: t })
                } else {
                    Ok(Self { j: f64::NAN, t, p: f64::NAN, x: t })
                }
            }
            Coupling::P(p) => {
                if !(p > 0.0 && p < 1.0) {
                    return bad("p", p);
                }
                let t = p / (2.0 - p);
                Ok(Self { j: -0.5 * (-p).ln_1p(), t, p, x: t })
            }
        }
    }
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self::from_coupling(Coupling::J(1.0)).expect("J=1 is valid")
    }
}

/// Embedding data for lattice graphs: integer coordinates per vertex and the
/// universal-cover displacement of each edge from its tail to its head.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub dim: usize,
    /// Side length per direction when the graph is a torus.
    pub period: Option<i64>,
    pub coords: Vec<Vec<i64>>,
    pub displacement: Vec<Vec<i64>>,
}

#[derive(Clone, Debug)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    params: Vec<EdgeParams>,
    adjacency: Vec<Vec<(usize, usize)>>,
    geometry: Option<Geometry>,
}

impl Graph {
    /// Builds a multigraph with default couplings (J = 1 on every edge).
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let params = vec![EdgeParams::default(); edges.len()];
        Self::with_params(vertex_count, edges, params)
    }

    pub fn with_params(
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        params: Vec<EdgeParams>,
    ) -> Result<Self> {
        assert_eq!(edges.len(), params.len(), "one parameter record per edge");
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (e, &(u, v)) in edges.iter().enumerate() {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: w, count: vertex_count });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { edge: e, vertex: u });
            }
            adjacency[u].push((e, v));
            adjacency[v].push((e, u));
        }
        Ok(Self { vertex_count, edges, params, adjacency, geometry: None })
    }

    pub(crate) fn with_geometry(mut self, geometry: Geometry) -> Self {
        assert_eq!(geometry.coords.len(), self.vertex_count);
        assert_eq!(geometry.displacement.len(), self.edges.len());
        self.geometry = Some(geometry);
        self
    }

    pub fn set_uniform(&mut self, c: Coupling) -> Result<()> {
        let p = EdgeParams::from_coupling(c)?;
        self.params.iter_mut().for_each(|slot| *slot = p);
        Ok(())
    }

    pub fn uniform(mut self, c: Coupling) -> Result<Self> {
        self.set_uniform(c)?;
        Ok(self)
    }

    pub fn set_params(&mut self, params: Vec<EdgeParams>) {
        assert_eq!(params.len(), self.edges.len());
        self.params = params;
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn params(&self) -> &[EdgeParams] {
        &self.params
    }

    pub fn j_values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.j).collect()
    }

    pub fn t_values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.t).collect()
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.p).collect()
    }

    pub fn x_values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.x).collect()
    }

    /// (edge index, other endpoint) pairs at v.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn geometry(&self) -> Option<&Geometry> {
        self.geometry.as_ref()
    }

    pub fn no_edges(&self) -> EdgeSet {
        EdgeSet::empty(self.edges.len())
    }

    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::full(self.edges.len())
    }

    pub fn no_vertices(&self) -> VertexSet {
        VertexSet::empty(self.vertex_count)
    }

    pub fn vertex_set<I: IntoIterator<Item = usize>>(&self, vs: I) -> VertexSet {
        VertexSet::from_indices(self.vertex_count, vs)
    }

    /// Same vertices, only the edges of `omega`, in increasing index order.
    /// Returns the new graph and the original index of each kept edge.
    pub fn restrict(&self, omega: &EdgeSet) -> (Graph, Vec<usize>) {
        let kept: Vec<usize> = omega.iter().collect();
        let edges = kept.iter().map(|&e| self.edges[e]).collect();
        let params = kept.iter().map(|&e| self.params[e]).collect();
        let g = Graph::with_params(self.vertex_count, edges, params).expect("subgraph of a valid graph");
        (g, kept)
    }
}
