//! Z/qZ-valued 1-chains on graphs. One residue per edge on its reference
//! orientation; reversing an edge negates the value.

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph, VertexSet, WindingCycle};
use crate::rng::Randomness;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ChainQ {
    q: u32,
    values: Vec<u32>,
}

impl ChainQ {
    pub fn zero(q: u32, len: usize) -> Self {
        assert!(q >= 2, "modulus must be at least 2");
        Self { q, values: vec![0; len] }
    }

    pub fn from_values(q: u32, values: Vec<u32>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("q={q}")));
        }
        if let Some(&v) = values.iter().find(|&&v| v >= q) {
            return Err(Error::InvalidParameter(format!("residue {v} not below q={q}")));
        }
        Ok(Self { q, values })
    }

    /// Inverse of [`ChainQ::index`].
    pub fn from_index(q: u32, len: usize, mut index: usize) -> Self {
        let mut values = vec![0; len];
        for slot in values.iter_mut() {
            *slot = (index % q as usize) as u32;
            index /= q as usize;
        }
        Self { q, values }
    }

    /// Base-q number with edge 0 as least significant digit.
    pub fn index(&self) -> usize {
        self.values.iter().rev().fold(0usize, |acc, &v| acc * self.q as usize + v as usize)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, e: usize) -> u32 {
        self.values[e]
    }

    pub fn set(&mut self, e: usize, value: u32) {
        self.values[e] = value % self.q;
    }

    pub fn support(&self) -> EdgeSet {
        EdgeSet::from_indices(self.values.len(), self.values.iter().enumerate().filter(|(_, &v)| v != 0).map(|(e, _)| e))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// `edge_index,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("edge_index,value\n");
        for (e, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{e},{v}\n"));
        }
        out
    }

    pub fn from_csv(q: u32, len: usize, text: &str) -> Result<Self> {
        let mut values = vec![0; len];
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if i == 0 && line == "edge_index,value" || line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let (e, v) = line.split_once(',').ok_or_else(|| err("expected `edge_index,value`"))?;
            let e: usize = e.trim().parse().map_err(|_| err("bad edge index"))?;
            let v: u32 = v.trim().parse().map_err(|_| err("bad value"))?;
            if e >= len {
                return Err(err("edge index out of range"));
            }
            values[e] = v;
        }
        Self::from_values(q, values)
    }
}

/// (∂η)_v: inflow minus outflow at v, mod q.
pub fn boundary_q(graph: &Graph, eta: &ChainQ) -> Vec<u32> {
    let q = eta.q as u64;
    let mut div = vec![0u64; graph.vertex_count()];
    for (e, &value) in eta.values.iter().enumerate() {
        if value == 0 {
            continue;
        }
        let (u, v) = graph.endpoints(e);
        div[v] = (div[v] + value as u64) % q;
        div[u] = (div[u] + q - value as u64) % q;
    }
    div.into_iter().map(|d| d as u32).collect()
}

pub fn is_divergence_free(graph: &Graph, eta: &ChainQ) -> bool {
    boundary_q(graph, eta).iter().all(|&d| d == 0)
}

/// |ker ∂^ω| = q^(|ω| + κ(ω) − |V|).
pub fn kernel_count(graph: &Graph, omega: &EdgeSet, q: u32) -> u128 {
    (q as u128).checked_pow(graph.cyclomatic_number(omega) as u32).expect("kernel count overflows u128")
}

/// Uniform element of ker(∂^ω): free uniform residues off a spanning forest,
/// then forest values forced leaf-inward so every vertex balances.
pub fn sample_uniform_kernel<R: Randomness + ?Sized>(graph: &Graph, omega: &EdgeSet, q: u32, rng: &mut R) -> ChainQ {
    let forest = graph.spanning_forest(omega);
    let mut eta = ChainQ::zero(q, graph.edge_count());
    for e in omega.iter() {
        if !forest.edges.contains(e) {
            eta.values[e] = rng.below(q);
        }
    }
    let mut div = boundary_q(graph, &eta);
    for &v in forest.order.iter().rev() {
        let Some((e, parent)) = forest.parent[v] else { continue };
        let d = div[v];
        // the forest edge must cancel the divergence d at v
        eta.values[e] = if graph.endpoints(e).1 == v { (q - d) % q } else { d };
        div[v] = 0;
        // total divergence is conserved, so v's excess moves to the parent
        div[parent] = (div[parent] + d) % q;
    }
    debug_assert!(is_divergence_free(graph, &eta));
    eta
}

/// Vertices whose coordinate in `direction` equals `level`.
pub fn torus_hyperplane(graph: &Graph, direction: usize, level: i64) -> Result<VertexSet> {
    let geo = graph.geometry().ok_or(Error::MissingGeometry)?;
    if direction >= geo.dim {
        return Err(Error::InvalidParameter(format!("direction {direction} in dimension {}", geo.dim)));
    }
    Ok(graph.vertex_set((0..graph.vertex_count()).filter(|&v| geo.coords[v][direction] == level)))
}

/// Net flow of η across the hyperplane H in `direction`:
/// the sum over v ∈ H of η on the oriented edge (v, v + e_direction).
pub fn flow_observable(graph: &Graph, eta: &ChainQ, hyperplane: &VertexSet, direction: usize) -> Result<u32> {
    let geo = graph.geometry().ok_or(Error::MissingGeometry)?;
    let q = eta.q as u64;
    let mut total = 0u64;
    for (e, disp) in geo.displacement.iter().enumerate() {
        let value = eta.values[e] as u64;
        if value == 0 {
            continue;
        }
        let along = disp.iter().enumerate().all(|(j, &c)| if j == direction { c.abs() == 1 } else { c == 0 });
        if !along {
            continue;
        }
        let (u, v) = graph.endpoints(e);
        if disp[direction] == 1 && hyperplane.contains(u) {
            total += value;
        } else if disp[direction] == -1 && hyperplane.contains(v) {
            total += q - value;
        }
    }
    Ok((total % q) as u32)
}

/// η + kγ edgewise.
pub fn shift_by_winding(eta: &ChainQ, gamma: &ChainQ, k: u32) -> Result<ChainQ> {
    if eta.q != gamma.q {
        return Err(Error::ModulusMismatch(eta.q, gamma.q));
    }
    if eta.len() != gamma.len() {
        return Err(Error::SpaceMismatch);
    }
    let q = eta.q as u64;
    let values = eta.values.iter().zip(&gamma.values).map(|(&a, &b)| ((a as u64 + k as u64 * b as u64) % q) as u32).collect();
    Ok(ChainQ { q: eta.q, values })
}

/// Unit flow around a cycle: +1 on forward steps, −1 on backward steps.
pub fn cycle_chain(cycle: &WindingCycle, q: u32, len: usize) -> ChainQ {
    let mut eta = ChainQ::zero(q, len);
    for &(e, forward) in &cycle.steps {
        let add = if forward { 1 } else { q - 1 };
        eta.values[e] = (eta.values[e] + add) % q;
    }
    eta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::exact_outcomes;

    #[test]
    fn boundary_examples() {
        let tri = Graph::triangle();
        let flow = ChainQ::from_values(3, vec![1, 1, 1]).unwrap();
        assert_eq!(boundary_q(&tri, &flow), vec![0, 0, 0]);
        let e = Graph::single_edge();
        let eta = ChainQ::from_values(3, vec![2]).unwrap();
        assert_eq!(boundary_q(&e, &eta), vec![1, 2]);
        assert_eq!(boundary_q(&tri, &ChainQ::zero(3, 3)), vec![0, 0, 0]);
    }

    #[test]
    fn kernel_sampler_is_exactly_uniform() {
        let c4 = Graph::cycle(4);
        let law = exact_outcomes(1000, |r| sample_uniform_kernel(&c4, &c4.all_edges(), 3, r)).unwrap();
        assert_eq!(law.len(), 3);
        assert!(law.values().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));
        let theta = Graph::theta();
        let law = exact_outcomes(1000, |r| sample_uniform_kernel(&theta, &theta.all_edges(), 4, r)).unwrap();
        assert_eq!(law.len(), 16);
        for eta in law.keys() {
            assert!(is_divergence_free(&theta, eta));
        }
    }

    #[test]
    fn tree_kernel_is_zero() {
        let p = Graph::path(5);
        let law = exact_outcomes(10, |r| sample_uniform_kernel(&p, &p.all_edges(), 5, r)).unwrap();
        assert_eq!(law.len(), 1);
        assert!(law.keys().next().unwrap().is_zero());
    }

    #[test]
    fn flow_on_small_torus() {
        let t = Graph::torus(2, 1);
        // edges from vertex 0 (coords 0,0): index 0 is +e_0 to vertex 1; from vertex 1: index 2 is +e_0 back to 0
        assert_eq!(t.endpoints(0), (0, 1));
        assert_eq!(t.endpoints(2), (1, 0));
        let h = torus_hyperplane(&t, 0, 0).unwrap();
        for k in 0..3 {
            let mut eta = ChainQ::zero(3, 8);
            eta.set(0, k);
            eta.set(2, k);
            assert!(is_divergence_free(&t, &eta));
            assert_eq!(flow_observable(&t, &eta, &h, 0).unwrap(), k);
        }
        assert!(flow_observable(&Graph::triangle(), &ChainQ::zero(3, 3), &h, 0).is_err());
    }

    #[test]
    fn shift_round_trip() {
        let a = ChainQ::from_values(5, vec![1, 2, 3]).unwrap();
        let g = ChainQ::from_values(5, vec![4, 0, 1]).unwrap();
        let b = shift_by_winding(&a, &g, 3).unwrap();
        assert_eq!(shift_by_winding(&b, &g, 2).unwrap(), a);
        assert_eq!(shift_by_winding(&a, &g, 0).unwrap(), a);
        assert!(shift_by_winding(&a, &ChainQ::zero(3, 3), 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let a = ChainQ::from_values(7, vec![0, 6, 3]).unwrap();
        assert_eq!(ChainQ::from_csv(7, 3, &a.to_csv()).unwrap(), a);
    }
}
