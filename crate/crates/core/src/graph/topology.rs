use super::{EdgeSet, Graph, UnionFind, VertexSet, WrapUnionFind};
use crate::error::{Error, Result};
use std::collections::VecDeque;

/// BFS spanning forest of the spanning subgraph (V, ω).
#[derive(Clone, Debug)]
pub struct SpanningForest {
    /// (edge to parent, parent vertex); None for roots.
    pub parent: Vec<Option<(usize, usize)>>,
    pub depth: Vec<usize>,
    /// Every vertex, in BFS order. Reversed, this is a leaf-peeling order.
    pub order: Vec<usize>,
    pub edges: EdgeSet,
}

/// A cycle closing with nonzero cover displacement.
#[derive(Clone, Debug, PartialEq)]
pub struct WindingCycle {
    /// Edges in traversal order; `true` when traversed along the reference
    /// orientation.
    pub steps: Vec<(usize, bool)>,
    /// Net number of turns around the torus per direction.
    pub winding: Vec<i64>,
}

impl Graph {
    pub fn kappa(&self, omega: &EdgeSet) -> usize {
        let mut uf = UnionFind::new(self.vertex_count());
        for e in omega.iter() {
            let (u, v) = self.endpoints(e);
            uf.union(u, v);
        }
        uf.components()
    }

    /// Cluster label per vertex, labels dense and ordered by first vertex.
    pub fn cluster_labels(&self, omega: &EdgeSet) -> (Vec<usize>, usize) {
        let mut uf = UnionFind::new(self.vertex_count());
        for e in omega.iter() {
            let (u, v) = self.endpoints(e);
            uf.union(u, v);
        }
        let k = uf.components();
        (uf.labels(), k)
    }

    /// Vertices of odd degree in ω.
    pub fn boundary_gf2(&self, omega: &EdgeSet) -> VertexSet {
        let mut b = self.no_vertices();
        for e in omega.iter() {
            let (u, v) = self.endpoints(e);
            b.toggle(u);
            b.toggle(v);
        }
        b
    }

    pub fn spanning_forest(&self, omega: &EdgeSet) -> SpanningForest {
        let n = self.vertex_count();
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut edges = self.no_edges();
        let mut queue = VecDeque::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &(e, w) in self.incident(v) {
                    if !seen[w] && omega.contains(e) {
                        seen[w] = true;
                        parent[w] = Some((e, v));
                        depth[w] = depth[v] + 1;
                        edges.insert(e);
                        queue.push_back(w);
                    }
                }
            }
        }
        SpanningForest { parent, depth, order, edges }
    }

    /// |ω| + κ(ω) − |V|, the dimension of the cycle space of ω.
    pub fn cyclomatic_number(&self, omega: &EdgeSet) -> usize {
        omega.count() + self.kappa(omega) - self.vertex_count()
    }

    /// Fundamental cycles of a spanning forest of ω; a GF(2) basis of the
    /// even subgraphs of ω.
    pub fn cycle_space_basis(&self, omega: &EdgeSet) -> Vec<EdgeSet> {
        let forest = self.spanning_forest(omega);
        omega
            .iter()
            .filter(|&e| !forest.edges.contains(e))
            .map(|e| {
                let mut cycle = self.no_edges();
                cycle.insert(e);
                let (mut a, mut b) = self.endpoints(e);
                while a != b {
                    let climb = if forest.depth[a] >= forest.depth[b] { &mut a } else { &mut b };
                    let (pe, pv) = forest.parent[*climb].expect("endpoints share a tree");
                    cycle.toggle(pe);
                    *climb = pv;
                }
                cycle
            })
            .collect()
    }

    /// |E_∅(ω)| = 2^(cyclomatic number). Panics past 2^127.
    pub fn even_subgraph_count(&self, omega: &EdgeSet) -> u128 {
        let c = self.cyclomatic_number(omega);
        1u128.checked_shl(c as u32).filter(|_| c < 128).expect("even subgraph count overflows u128")
    }

    /// Whether every cluster of ω meets A an even number of times.
    pub fn in_event_fa(&self, omega: &EdgeSet, sources: &VertexSet) -> Result<bool> {
        check_even(sources)?;
        let (labels, k) = self.cluster_labels(omega);
        let mut parity = vec![false; k];
        for v in sources.iter() {
            parity[labels[v]] ^= true;
        }
        Ok(parity.iter().all(|&odd| !odd))
    }

    /// |E_A(ω)| via the switching principle.
    pub fn sources_count(&self, omega: &EdgeSet, sources: &VertexSet) -> Result<u128> {
        Ok(if self.in_event_fa(omega, sources)? { self.even_subgraph_count(omega) } else { 0 })
    }

    /// Some γ ⊂ ω with ∂γ = A, built by peeling a spanning forest of ω from
    /// the leaves: a tree edge is used when the subtree below it holds an odd
    /// number of sources.
    pub fn source_subgraph(&self, omega: &EdgeSet, sources: &VertexSet) -> Result<EdgeSet> {
        check_even(sources)?;
        let forest = self.spanning_forest(omega);
        let mut odd: Vec<bool> = (0..self.vertex_count()).map(|v| sources.contains(v)).collect();
        let mut gamma = self.no_edges();
        for &v in forest.order.iter().rev() {
            match forest.parent[v] {
                Some((e, p)) if odd[v] => {
                    gamma.insert(e);
                    odd[p] ^= true;
                }
                Some(_) => {}
                None if odd[v] => return Err(Error::NotInSourceEvent),
                None => {}
            }
        }
        Ok(gamma)
    }

    /// Whether (V, ω) is bipartite. Parallel edges are harmless.
    pub fn is_bipartite(&self, omega: &EdgeSet) -> bool {
        let n = self.vertex_count();
        let mut side: Vec<Option<bool>> = vec![None; n];
        let mut queue = VecDeque::new();
        for root in 0..n {
            if side[root].is_some() {
                continue;
            }
            side[root] = Some(false);
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                let s = side[v].unwrap();
                for &(e, w) in self.incident(v) {
                    if !omega.contains(e) {
                        continue;
                    }
                    match side[w] {
                        None => {
                            side[w] = Some(!s);
                            queue.push_back(w);
                        }
                        Some(sw) if sw == s => return false,
                        Some(_) => {}
                    }
                }
            }
        }
        true
    }

    /// Directions in which some cycle of ω wraps the torus.
    pub fn wrap_directions(&self, omega: &EdgeSet) -> Result<Vec<bool>> {
        let geo = self.geometry().filter(|g| g.period.is_some()).ok_or(Error::MissingGeometry)?;
        let mut uf = WrapUnionFind::new(self.vertex_count(), geo.dim);
        for e in omega.iter() {
            let (u, v) = self.endpoints(e);
            uf.union(u, v, &geo.displacement[e]);
        }
        Ok(uf.wraps().to_vec())
    }

    /// A simple cycle of ω that wraps, in `direction` if given. The first
    /// closing edge (in index order) with a suitable mismatch is used, and the
    /// cycle is completed through the union-find spanning forest.
    pub fn winding_cycle(&self, omega: &EdgeSet, direction: Option<usize>) -> Result<Option<WindingCycle>> {
        let geo = self.geometry().filter(|g| g.period.is_some()).ok_or(Error::MissingGeometry)?;
        let period = geo.period.unwrap();
        let n = self.vertex_count();
        let mut uf = WrapUnionFind::new(n, geo.dim);
        let mut tree: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for e in omega.iter() {
            let (u, v) = self.endpoints(e);
            match uf.union(u, v, &geo.displacement[e]) {
                None => {
                    tree[u].push((e, v));
                    tree[v].push((e, u));
                }
                Some(mismatch) => {
                    let hit = match direction {
                        Some(j) => mismatch[j] != 0,
                        None => mismatch.iter().any(|&m| m != 0),
                    };
                    if hit {
                        let mut steps = vec![(e, true)];
                        steps.extend(self.tree_path(&tree, v, u));
                        let winding = mismatch.iter().map(|m| m / period).collect();
                        return Ok(Some(WindingCycle { steps, winding }));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Oriented edge steps of the unique path from `from` to `to` in a forest.
    fn tree_path(&self, tree: &[Vec<(usize, usize)>], from: usize, to: usize) -> Vec<(usize, bool)> {
        let mut back: Vec<Option<(usize, usize)>> = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for &(e, w) in &tree[v] {
                if !seen[w] {
                    seen[w] = true;
                    back[w] = Some((e, v));
                    queue.push_back(w);
                }
            }
        }
        let mut steps = Vec::new();
        let mut cur = to;
        while cur != from {
            let (e, prev) = back[cur].expect("endpoints lie in one tree");
            steps.push((e, self.endpoints(e).0 == prev));
            cur = prev;
        }
        steps.reverse();
        steps
    }
}

fn check_even(sources: &VertexSet) -> Result<()> {
    let n = sources.count();
    if n % 2 == 1 {
        Err(Error::OddSourceSet(n))
    } else {
        Ok(())
    }
}
