//! Finite cubical complexes with Z/qZ chains: signed boundary and coboundary
//! maps, plaquette random-cluster weights, q-flow cell weights and the
//! domain-wall map. Kernel and image sizes are counted by enumeration under
//! a hard guard.

use crate::chains::ChainQ;
use crate::error::{guard, Error, Result, ENUMERATION_GUARD};
use crate::graph::{EdgeSet, Geometry, Graph};
use std::collections::{HashMap, HashSet};

/// Cell chains share the representation of edge chains: one residue per
/// cell of a fixed dimension, in the complex's cell order.
pub type CellChainQ = ChainQ;

/// A unit cube rooted at its minimal corner, spanning sorted directions.
/// The reference orientation is the wedge of those directions in order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub anchor: Vec<i64>,
    pub dirs: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Box,
    Torus(i64),
    Custom,
    Graph,
}

/// Which weight formula to use for the plaquette random-cluster model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaquetteDefinition {
    /// |ker ∂_{k−1}^ω| / |Im ∂_k^ω|.
    Homological,
    /// |ker d_k^ω| / |Im d_{k−1}^ω|.
    Cohomological,
}

/// A subcomplex given by its cells in every dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subcomplex {
    pub cells: Vec<EdgeSet>,
}

#[derive(Clone, Debug)]
pub struct CubicalComplex {
    kind: Kind,
    ambient: usize,
    cells: Vec<Vec<Cell>>,
    /// faces[k][c]: (face index in dimension k−1, signed coefficient).
    faces: Vec<Vec<Vec<(usize, i64)>>>,
}

fn dir_subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..1 << d {
        if mask.count_ones() as usize == k {
            out.push((0..d).filter(|&i| mask >> i & 1 == 1).collect());
        }
    }
    out.sort();
    out
}

fn anchors(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for (&l, &h) in lo.iter().zip(hi) {
        out = out.into_iter().flat_map(|a| (l..=h).map(move |x| {
            let mut b = a.clone();
            b.push(x);
            b
        })).collect();
    }
    out
}

impl CubicalComplex {
    /// All cells of the box Π [0, sides_i] ⊂ Z^d.
    pub fn box_complex(sides: &[usize]) -> Result<Self> {
        if sides.is_empty() || sides.contains(&0) {
            return Err(Error::InvalidParameter("box sides must be positive".into()));
        }
        let d = sides.len();
        let hi: Vec<i64> = sides.iter().map(|&s| s as i64).collect();
        let mut cells = Vec::new();
        for k in 0..=d {
            let mut layer = Vec::new();
            for anchor in anchors(&vec![0; d], &hi) {
                for dirs in dir_subsets(d, k) {
                    if dirs.iter().all(|&i| anchor[i] < hi[i]) {
                        layer.push(Cell { anchor: anchor.clone(), dirs });
                    }
                }
            }
            cells.push(layer);
        }
        Self::from_cells(Kind::Box, d, cells)
    }

    /// All cells of the torus (Z/LZ)^d, L ≥ 2.
    pub fn torus_complex(d: usize, side: usize) -> Result<Self> {
        if d == 0 || side < 2 {
            return Err(Error::InvalidParameter("torus needs d >= 1 and side >= 2".into()));
        }
        let hi = vec![side as i64 - 1; d];
        let cells = (0..=d)
            .map(|k| {
                anchors(&vec![0; d], &hi)
                    .into_iter()
                    .flat_map(|a| dir_subsets(d, k).into_iter().map(move |dirs| Cell { anchor: a.clone(), dirs }))
                    .collect()
            })
            .collect();
        Self::from_cells(Kind::Torus(side as i64), d, cells)
    }

    /// The unit square with its four edges and four vertices.
    pub fn single_square() -> Self {
        Self::box_complex(&[1, 1]).expect("valid sides")
    }

    /// The 1-complex of a graph; edge (u, v) has boundary v − u.
    pub fn from_graph(graph: &Graph) -> Self {
        let cells = vec![
            (0..graph.vertex_count()).map(|v| Cell { anchor: vec![v as i64], dirs: vec![] }).collect(),
            graph.edges().iter().map(|&(u, _)| Cell { anchor: vec![u as i64], dirs: vec![0] }).collect(),
        ];
        let faces = vec![
            vec![],
            graph.edges().iter().map(|&(u, v)| vec![(v, 1), (u, -1)]).collect(),
        ];
        Self { kind: Kind::Graph, ambient: 1, cells, faces }
    }

    /// Parses one `C <dim> <anchor coords> <directions>` line per cell. Every
    /// face of every cell must be listed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cells: Vec<Vec<Cell>> = Vec::new();
        let mut ambient = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: n + 1, msg: msg.to_string() };
            let mut tokens = line.split_whitespace();
            if tokens.next() != Some("C") {
                return Err(err("expected C record"));
            }
            let nums: Vec<i64> = tokens.map(|t| t.parse::<i64>().map_err(|_| err("bad integer"))).collect::<Result<_>>()?;
            let (&k, rest) = nums.split_first().ok_or_else(|| err("missing dimension"))?;
            if k < 0 || rest.len() < k as usize {
                return Err(err("dimension does not match the record"));
            }
            let k = k as usize;
            let d = rest.len() - k;
            if *ambient.get_or_insert(d) != d {
                return Err(err("inconsistent ambient dimension"));
            }
            let dirs: Vec<usize> = rest[d..].iter().map(|&x| x as usize).collect();
            if rest[d..].iter().any(|&x| x < 0 || x as usize >= d) || dirs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(err("directions must be distinct, sorted and below the ambient dimension"));
            }
            if cells.len() <= k {
                cells.resize(k + 1, Vec::new());
            }
            cells[k].push(Cell { anchor: rest[..d].to_vec(), dirs });
        }
        let ambient = ambient.ok_or(Error::Parse { line: 0, msg: "no cells".into() })?;
        for layer in &mut cells {
            layer.sort();
            layer.dedup();
        }
        Self::from_cells(Kind::Custom, ambient, cells)
    }

    pub fn to_text(&self) -> Result<String> {
        if self.kind == Kind::Graph {
            return Err(Error::MissingGeometry);
        }
        let mut out = String::new();
        for (k, layer) in self.cells.iter().enumerate() {
            for c in layer {
                out.push_str(&format!("C {k}"));
                for a in &c.anchor {
                    out.push_str(&format!(" {a}"));
                }
                for d in &c.dirs {
                    out.push_str(&format!(" {d}"));
                }
                out.push('\n');
            }
        }
        Ok(out)
    }

    fn from_cells(kind: Kind, ambient: usize, cells: Vec<Vec<Cell>>) -> Result<Self> {
        let wrap = |a: &mut Vec<i64>| {
            if let Kind::Torus(l) = kind {
                for x in a.iter_mut() {
                    *x = x.rem_euclid(l);
                }
            }
        };
        let index: Vec<HashMap<&Cell, usize>> = cells.iter().map(|l| l.iter().enumerate().map(|(i, c)| (c, i)).collect()).collect();
        let mut faces = vec![Vec::new()];
        for k in 1..cells.len() {
            let mut layer = Vec::new();
            for c in &cells[k] {
                let mut coeffs: Vec<(usize, i64)> = Vec::new();
                for j in 0..k {
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    let mut dirs = c.dirs.clone();
                    let dir = dirs.remove(j);
                    let minus = Cell { anchor: c.anchor.clone(), dirs: dirs.clone() };
                    let mut plus_anchor = c.anchor.clone();
                    plus_anchor[dir] += 1;
                    wrap(&mut plus_anchor);
                    let plus = Cell { anchor: plus_anchor, dirs };
                    for (face, s) in [(plus, sign), (minus, -sign)] {
                        let f = *index[k - 1].get(&face).ok_or(Error::InvalidParameter(format!("complex not closed under faces at {face:?}")))?;
                        match coeffs.iter_mut().find(|(g, _)| *g == f) {
                            Some(entry) => entry.1 += s,
                            None => coeffs.push((f, s)),
                        }
                    }
                }
                coeffs.retain(|&(_, s)| s != 0);
                layer.push(coeffs);
            }
            faces.push(layer);
        }
        Ok(Self { kind, ambient, cells, faces })
    }

    /// Highest cell dimension present.
    pub fn top_dim(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn cell_count(&self, k: usize) -> usize {
        self.cells.get(k).map_or(0, Vec::len)
    }

    pub fn cells(&self, k: usize) -> &[Cell] {
        self.cells.get(k).map_or(&[], Vec::as_slice)
    }

    /// Signed faces of the k-cell `c`.
    pub fn faces_of(&self, k: usize, c: usize) -> &[(usize, i64)] {
        &self.faces[k][c]
    }

    /// Boxes and tori carry the cell duality used by the domain-wall map.
    pub fn has_dual_pairing(&self) -> bool {
        matches!(self.kind, Kind::Box | Kind::Torus(_)) && self.top_dim() == self.ambient
    }

    /// The 1-skeleton as a graph, edge i being 1-cell i oriented from its
    /// anchor.
    pub fn to_graph(&self) -> Result<Graph> {
        let edges: Vec<(usize, usize)> = (0..self.cell_count(1))
            .map(|e| {
                let f = &self.faces[1][e];
                let head = f.iter().find(|x| x.1 == 1).map_or(f[0].0, |x| x.0);
                let tail = f.iter().find(|x| x.1 == -1).map_or(f[0].0, |x| x.0);
                (tail, head)
            })
            .collect();
        if self.kind == Kind::Graph {
            return Graph::new(self.cell_count(0), edges);
        }
        let period = if let Kind::Torus(l) = self.kind { Some(l) } else { None };
        let geometry = Geometry {
            dim: self.ambient,
            period,
            coords: self.cells[0].iter().map(|c| c.anchor.clone()).collect(),
            displacement: self.cells(1).iter().map(|c| (0..self.ambient).map(|i| i64::from(c.dirs[0] == i)).collect()).collect(),
        };
        Ok(Graph::new(self.cell_count(0), edges)?.with_geometry(geometry))
    }

    fn check_dim(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.top_dim() {
            return Err(Error::InvalidParameter(format!("dimension {k} outside 1..={}", self.top_dim())));
        }
        Ok(())
    }

    fn check_chain(&self, k: usize, chain: &ChainQ) -> Result<()> {
        if chain.len() != self.cell_count(k) {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    /// ∂_k: C_k → C_{k−1}.
    pub fn boundary(&self, k: usize, eta: &CellChainQ) -> Result<CellChainQ> {
        self.check_dim(k)?;
        self.check_chain(k, eta)?;
        let q = eta.q() as i64;
        let mut out = vec![0i64; self.cell_count(k - 1)];
        for (c, &v) in eta.values().iter().enumerate() {
            if v != 0 {
                for &(f, s) in &self.faces[k][c] {
                    out[f] = (out[f] + s * v as i64).rem_euclid(q);
                }
            }
        }
        ChainQ::from_values(eta.q(), out.into_iter().map(|v| v as u32).collect())
    }

    /// d_k: C_{k−1} → C_k, the adjoint of ∂_k for the cellwise pairing.
    pub fn coboundary(&self, k: usize, sigma: &CellChainQ) -> Result<CellChainQ> {
        self.check_dim(k)?;
        self.check_chain(k - 1, sigma)?;
        let q = sigma.q() as i64;
        let values = self.faces[k]
            .iter()
            .map(|faces| faces.iter().map(|&(f, s)| s * sigma.get(f) as i64).sum::<i64>().rem_euclid(q) as u32)
            .collect();
        ChainQ::from_values(sigma.q(), values)
    }

    /// (d_k σ)_c for a single k-cell.
    fn coboundary_at(&self, k: usize, c: usize, sigma: &[u32], q: u32) -> u32 {
        self.faces[k][c].iter().map(|&(f, s)| s * sigma[f] as i64).sum::<i64>().rem_euclid(q as i64) as u32
    }

    /// Number of chains of C_{j} enumerated when counting over dimension j.
    fn chain_space(&self, j: usize, q: u32) -> Result<usize> {
        let size = (q as u128).checked_pow(self.cell_count(j) as u32).unwrap_or(u128::MAX);
        guard("chain enumeration", size, ENUMERATION_GUARD)?;
        Ok(size as usize)
    }

    /// Size of the subgroup of (Z/qZ)^len spanned by `gens`.
    fn span_size(gens: &[Vec<u32>], len: usize, q: u32) -> Result<usize> {
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        let zero = vec![0u32; len];
        seen.insert(zero.clone());
        let mut frontier = vec![zero];
        while let Some(v) = frontier.pop() {
            for g in gens {
                let w: Vec<u32> = v.iter().zip(g).map(|(a, b)| (a + b) % q).collect();
                if seen.insert(w.clone()) {
                    guard("span enumeration", seen.len() as u128, ENUMERATION_GUARD)?;
                    frontier.push(w);
                }
            }
        }
        Ok(seen.len())
    }

    fn boundary_columns(&self, k: usize, q: u32, selection: impl Iterator<Item = usize>) -> Vec<Vec<u32>> {
        selection
            .map(|c| {
                let mut col = vec![0u32; self.cell_count(k - 1)];
                for &(f, s) in &self.faces[k][c] {
                    col[f] = (col[f] as i64 + s).rem_euclid(q as i64) as u32;
                }
                col
            })
            .collect()
    }

    /// |Im ∂_k| restricted to the k-cells in `omega`.
    pub fn boundary_image_size(&self, k: usize, q: u32, omega: &EdgeSet) -> Result<usize> {
        self.check_dim(k)?;
        Self::span_size(&self.boundary_columns(k, q, omega.iter()), self.cell_count(k - 1), q)
    }

    /// |Im d_k| = size of the span of the coboundaries of (k−1)-cell
    /// indicators; 1 when k = 0.
    pub fn coboundary_image_size(&self, k: usize, q: u32) -> Result<usize> {
        if k == 0 {
            return Ok(1);
        }
        self.check_dim(k)?;
        let gens: Vec<Vec<u32>> = (0..self.cell_count(k - 1))
            .map(|f| {
                let mut unit = vec![0u32; self.cell_count(k - 1)];
                unit[f] = 1;
                (0..self.cell_count(k)).map(|c| self.coboundary_at(k, c, &unit, q)).collect()
            })
            .collect();
        Self::span_size(&gens, self.cell_count(k), q)
    }

    /// |ker ∂_j| by enumerating C_j; ∂_0 is the zero map.
    pub fn boundary_kernel_size(&self, j: usize, q: u32) -> Result<usize> {
        let n = self.chain_space(j, q)?;
        if j == 0 {
            return Ok(n);
        }
        self.check_dim(j)?;
        let len = self.cell_count(j);
        let mut count = 0;
        let mut acc = vec![0i64; self.cell_count(j - 1)];
        for idx in 0..n {
            let eta = ChainQ::from_index(q, len, idx);
            acc.iter_mut().for_each(|a| *a = 0);
            for (c, &v) in eta.values().iter().enumerate() {
                for &(f, s) in &self.faces[j][c] {
                    acc[f] += s * v as i64;
                }
            }
            if acc.iter().all(|a| a.rem_euclid(q as i64) == 0) {
                count += 1;
            }
        }
        Ok(count)
    }

    /// |ker d_k^ω|: chains σ ∈ C_{k−1} whose coboundary vanishes on every
    /// k-cell of ω.
    pub fn coboundary_kernel_size(&self, k: usize, q: u32, omega: &EdgeSet) -> Result<usize> {
        self.check_dim(k)?;
        let n = self.chain_space(k - 1, q)?;
        let len = self.cell_count(k - 1);
        let open: Vec<usize> = omega.iter().collect();
        Ok((0..n)
            .filter(|&idx| {
                let sigma = ChainQ::from_index(q, len, idx);
                open.iter().all(|&c| self.coboundary_at(k, c, sigma.values(), q) == 0)
            })
            .count())
    }

    /// The k-spanning subcomplex whose k-cells are `open`.
    pub fn k_spanning(&self, k: usize, open: &EdgeSet) -> Result<Subcomplex> {
        self.check_dim(k)?;
        if open.len() != self.cell_count(k) {
            return Err(Error::SpaceMismatch);
        }
        let cells = (0..=self.top_dim())
            .map(|j| match j.cmp(&k) {
                std::cmp::Ordering::Less => EdgeSet::full(self.cell_count(j)),
                std::cmp::Ordering::Equal => open.clone(),
                std::cmp::Ordering::Greater => EdgeSet::empty(self.cell_count(j)),
            })
            .collect();
        Ok(Subcomplex { cells })
    }

    fn spanning_cells<'a>(&self, k: usize, omega: &'a Subcomplex) -> Result<&'a EdgeSet> {
        self.check_dim(k)?;
        if omega.cells.len() != self.top_dim() + 1 || omega.cells.iter().enumerate().any(|(j, s)| s.len() != self.cell_count(j)) {
            return Err(Error::SpaceMismatch);
        }
        let spanning = omega.cells.iter().enumerate().all(|(j, s)| match j.cmp(&k) {
            std::cmp::Ordering::Less => s.count() == s.len(),
            std::cmp::Ordering::Equal => true,
            std::cmp::Ordering::Greater => s.is_empty(),
        });
        if !spanning {
            return Err(Error::NotSpanning);
        }
        Ok(&omega.cells[k])
    }

    /// Unnormalized plaquette random-cluster weight of a k-spanning ω.
    pub fn plaquette_rc_weight(&self, k: usize, q: u32, p: &[f64], omega: &Subcomplex, definition: PlaquetteDefinition) -> Result<f64> {
        let open = self.spanning_cells(k, omega)?;
        if p.len() != self.cell_count(k) || p.iter().any(|&p| !(0.0..1.0).contains(&p)) {
            return Err(Error::InvalidParameter("one p in [0,1) per k-cell".into()));
        }
        let ratio = match definition {
            PlaquetteDefinition::Homological => {
                self.boundary_kernel_size(k - 1, q)? as f64 / self.boundary_image_size(k, q, open)? as f64
            }
            PlaquetteDefinition::Cohomological => {
                self.coboundary_kernel_size(k, q, open)? as f64 / self.coboundary_image_size(k - 1, q)? as f64
            }
        };
        Ok(ratio * open.iter().map(|c| p[c] / (1.0 - p[c])).product::<f64>())
    }

    /// Checks |C_{k−1}| = |ker d_k| · |Im ∂_k| by enumeration.
    pub fn rank_nullity_check(&self, k: usize, q: u32) -> Result<bool> {
        self.check_dim(k)?;
        let total = self.chain_space(k - 1, q)?;
        let all = EdgeSet::full(self.cell_count(k));
        Ok(total == self.coboundary_kernel_size(k, q, &all)? * self.boundary_image_size(k, q, &all)?)
    }

    /// Π_{c ∈ supp η} x_c for η with ∂_k η = 0.
    pub fn q_flow_cell_weight(&self, k: usize, x: &[f64], eta: &CellChainQ) -> Result<f64> {
        if !self.boundary(k, eta)?.is_zero() {
            return Err(Error::NotDivergenceFree);
        }
        if x.len() != eta.len() {
            return Err(Error::SpaceMismatch);
        }
        Ok(eta.support().iter().map(|c| x[c]).product())
    }

    /// Domain walls of a spin configuration on dual (k−1)-cells. The spins
    /// live on primal (d−k+1)-cells and the walls are their boundary, a
    /// primal (d−k)-chain.
    pub fn domain_wall_map(&self, k: usize, sigma: &CellChainQ) -> Result<CellChainQ> {
        if !self.has_dual_pairing() {
            return Err(Error::MissingDualPairing);
        }
        let d = self.ambient;
        if k == 0 || k > d {
            return Err(Error::InvalidParameter(format!("k must lie in 1..={d}")));
        }
        self.boundary(d - k + 1, sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::boundary_q;
    use crate::rng::chain_rng;
    use rand::Rng;

    fn unit(q: u32, len: usize, i: usize) -> ChainQ {
        let mut c = ChainQ::zero(q, len);
        c.set(i, 1);
        c
    }

    #[test]
    fn cell_counts() {
        let sq = CubicalComplex::single_square();
        assert_eq!((sq.cell_count(0), sq.cell_count(1), sq.cell_count(2)), (4, 4, 1));
        let b = CubicalComplex::box_complex(&[2, 2]).unwrap();
        assert_eq!((b.cell_count(0), b.cell_count(1), b.cell_count(2)), (9, 12, 4));
        let t = CubicalComplex::torus_complex(2, 2).unwrap();
        assert_eq!((t.cell_count(0), t.cell_count(1), t.cell_count(2)), (4, 8, 4));
        let c = CubicalComplex::torus_complex(3, 3).unwrap();
        assert_eq!((c.cell_count(1), c.cell_count(2), c.cell_count(3)), (81, 81, 27));
    }

    #[test]
    fn square_boundary_is_alternating_cycle() {
        let sq = CubicalComplex::single_square();
        let face = unit(5, 1, 0);
        let b = sq.boundary(2, &face).unwrap();
        let mut values: Vec<u32> = b.values().to_vec();
        values.sort();
        assert_eq!(values, vec![1, 1, 4, 4]);
        assert!(sq.boundary(1, &b).unwrap().is_zero());
        assert!(sq.boundary(2, &ChainQ::zero(5, 1)).unwrap().is_zero());
    }

    #[test]
    fn boundary_squares_to_zero() {
        for complex in [
            CubicalComplex::box_complex(&[2, 2, 2]).unwrap(),
            CubicalComplex::torus_complex(3, 2).unwrap(),
            CubicalComplex::torus_complex(2, 3).unwrap(),
        ] {
            for k in 2..=complex.top_dim() {
                for c in 0..complex.cell_count(k) {
                    let b = complex.boundary(k, &unit(7, complex.cell_count(k), c)).unwrap();
                    assert!(complex.boundary(k - 1, &b).unwrap().is_zero());
                }
                for f in 0..complex.cell_count(k - 2) {
                    let d = complex.coboundary(k - 1, &unit(7, complex.cell_count(k - 2), f)).unwrap();
                    assert!(complex.coboundary(k, &d).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn first_boundary_matches_graph() {
        let complex = CubicalComplex::box_complex(&[2, 3]).unwrap();
        let graph = complex.to_graph().unwrap();
        let mut rng = chain_rng(11, 0);
        for _ in 0..50 {
            let values: Vec<u32> = (0..graph.edge_count()).map(|_| rng.gen_range(0..5)).collect();
            let eta = ChainQ::from_values(5, values).unwrap();
            assert_eq!(complex.boundary(1, &eta).unwrap().values(), boundary_q(&graph, &eta).as_slice());
        }
    }

    #[test]
    fn vertex_coboundary_is_signed_star() {
        let b = CubicalComplex::box_complex(&[2, 2]).unwrap();
        let centre = b.cells(0).iter().position(|c| c.anchor == vec![1, 1]).unwrap();
        let d = b.coboundary(1, &unit(3, 9, centre)).unwrap();
        assert_eq!(d.support().count(), 4);
        let g = b.to_graph().unwrap();
        for e in d.support().iter() {
            let (u, v) = g.endpoints(e);
            assert_eq!(d.get(e), if v == centre { 1 } else { assert_eq!(u, centre); 2 });
        }
    }

    #[test]
    fn adjointness_on_square() {
        let sq = CubicalComplex::single_square();
        let q = 4;
        let pair = |a: &ChainQ, b: &ChainQ| a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<u32>() % q;
        for s in 0..4usize {
            let sigma = ChainQ::from_index(q, 1, s);
            for t in 0..256 {
                let tau = ChainQ::from_index(q, 4, t);
                assert_eq!(pair(&sq.boundary(2, &sigma).unwrap(), &tau), pair(&sigma, &sq.coboundary(2, &tau).unwrap()));
            }
        }
    }

    #[test]
    fn rank_nullity_examples() {
        let sq = CubicalComplex::single_square();
        assert_eq!(sq.coboundary_kernel_size(2, 4, &EdgeSet::full(1)).unwrap(), 64);
        assert_eq!(sq.boundary_image_size(2, 4, &EdgeSet::full(1)).unwrap(), 4);
        assert!(sq.rank_nullity_check(2, 4).unwrap());
        let tri = CubicalComplex::from_graph(&Graph::triangle());
        assert!(tri.rank_nullity_check(1, 2).unwrap());
        assert_eq!(sq.boundary_image_size(2, 4, &EdgeSet::empty(1)).unwrap(), 1);
        assert_eq!(sq.coboundary_kernel_size(2, 4, &EdgeSet::empty(1)).unwrap(), 256);
        for q in [2, 3, 4, 6] {
            let t = CubicalComplex::torus_complex(2, 2).unwrap();
            assert!(t.rank_nullity_check(1, q).unwrap());
            assert!(t.rank_nullity_check(2, q).unwrap());
        }
    }

    #[test]
    fn graph_plaquette_weight_is_random_cluster() {
        let g = Graph::triangle();
        let c = CubicalComplex::from_graph(&g);
        let p = [0.3, 0.5, 0.6];
        for q in [2, 3] {
            let mut ratios = Vec::new();
            for mask in 0..8u64 {
                let omega = EdgeSet::from_mask(3, mask);
                let sub = c.k_spanning(1, &omega).unwrap();
                let w = c.plaquette_rc_weight(1, q, &p, &sub, PlaquetteDefinition::Homological).unwrap();
                let rc = (q as f64).powi(g.kappa(&omega) as i32) * omega.iter().map(|e| p[e] / (1.0 - p[e])).product::<f64>();
                ratios.push(w / rc);
            }
            assert!(ratios.iter().all(|r| (r / ratios[0] - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn square_ratio_agrees_both_ways() {
        let sq = CubicalComplex::single_square();
        let p = [0.4];
        let ratio = |def| {
            let open = sq.plaquette_rc_weight(2, 4, &p, &sq.k_spanning(2, &EdgeSet::full(1)).unwrap(), def).unwrap();
            let shut = sq.plaquette_rc_weight(2, 4, &p, &sq.k_spanning(2, &EdgeSet::empty(1)).unwrap(), def).unwrap();
            open / shut
        };
        let h = ratio(PlaquetteDefinition::Homological);
        assert!((h - ratio(PlaquetteDefinition::Cohomological)).abs() < 1e-12);
        assert!((h - 0.4 / 0.6 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn non_spanning_rejected() {
        let sq = CubicalComplex::single_square();
        let mut sub = sq.k_spanning(2, &EdgeSet::full(1)).unwrap();
        sub.cells[1].remove(0);
        assert_eq!(sq.plaquette_rc_weight(2, 2, &[0.5], &sub, PlaquetteDefinition::Homological), Err(Error::NotSpanning));
    }

    #[test]
    fn flow_weights() {
        let sq = CubicalComplex::single_square();
        let mut eta = ChainQ::zero(3, 1);
        assert_eq!(sq.q_flow_cell_weight(2, &[0.3], &eta).unwrap(), 1.0);
        eta.set(0, 2);
        assert_eq!(sq.q_flow_cell_weight(2, &[0.3], &eta), Err(Error::NotDivergenceFree));
        let t = CubicalComplex::torus_complex(2, 2).unwrap();
        let mut eta = ChainQ::zero(3, 4);
        eta.set(1, 2);
        assert!(!t.boundary(2, &eta).unwrap().is_zero());
        let all = ChainQ::from_values(3, vec![2; 4]).unwrap();
        assert!((t.q_flow_cell_weight(2, &[0.3; 4], &all).unwrap() - 0.3f64.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn domain_walls() {
        let b = CubicalComplex::box_complex(&[2, 2]).unwrap();
        let face = unit(2, 4, 0);
        let walls = b.domain_wall_map(1, &face).unwrap();
        let expected: EdgeSet = b.boundary(2, &face).unwrap().support();
        assert_eq!(walls.support(), expected);
        assert_eq!(walls.support().count(), 4);
        assert!(b.domain_wall_map(1, &ChainQ::zero(2, 4)).unwrap().is_zero());
        let t = CubicalComplex::torus_complex(2, 3).unwrap();
        assert!(t.domain_wall_map(1, &ChainQ::from_values(3, vec![2; 9]).unwrap()).unwrap().is_zero());
        let tri = CubicalComplex::from_graph(&Graph::triangle());
        assert_eq!(tri.domain_wall_map(1, &ChainQ::zero(2, 3)), Err(Error::MissingDualPairing));
        let custom = CubicalComplex::parse(&b.to_text().unwrap()).unwrap();
        assert_eq!(custom.domain_wall_map(1, &face), Err(Error::MissingDualPairing));
    }

    #[test]
    fn text_round_trip() {
        let b = CubicalComplex::box_complex(&[1, 2, 1]).unwrap();
        let parsed = CubicalComplex::parse(&b.to_text().unwrap()).unwrap();
        assert_eq!(parsed.cells, b.cells);
        assert_eq!(parsed.faces, b.faces);
        assert!(CubicalComplex::parse("C 1 0 0 0\n").is_err());
        assert!(matches!(CubicalComplex::parse("X 0 0\n"), Err(Error::Parse { line: 1, .. })));
    }
}
