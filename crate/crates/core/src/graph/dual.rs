//! Planar duals via rotation systems. Dart `2e` runs along edge e's reference
//! orientation (tail u), dart `2e + 1` against it. A rotation lists, per
//! vertex, the darts leaving it in counterclockwise order; faces are the
//! orbits of `d ↦ rot(rev(d))`.

use super::Graph;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct PlanarDualPairing {
    rotation: Vec<Vec<usize>>,
    face_of_dart: Vec<usize>,
    faces: Vec<Vec<usize>>,
    dual: Graph,
}

impl PlanarDualPairing {
    /// Edge e of the primal is paired with edge e of the dual, oriented from
    /// the face of dart 2e to the face of dart 2e+1.
    pub fn from_rotation(graph: &Graph, rotation: Vec<Vec<usize>>) -> Result<Self> {
        let darts = 2 * graph.edge_count();
        if rotation.len() != graph.vertex_count() {
            return Err(Error::InvalidParameter("one rotation per vertex".into()));
        }
        let mut next_around = vec![usize::MAX; darts];
        for (v, rot) in rotation.iter().enumerate() {
            for (i, &d) in rot.iter().enumerate() {
                let tail = if d % 2 == 0 { graph.endpoints(d / 2).0 } else { graph.endpoints(d / 2).1 };
                if d >= darts || tail != v || next_around[d] != usize::MAX {
                    return Err(Error::InvalidParameter(format!("bad dart {d} in rotation at {v}")));
                }
                next_around[d] = rot[(i + 1) % rot.len()];
            }
        }
        if next_around.contains(&usize::MAX) {
            return Err(Error::InvalidParameter("rotation misses a dart".into()));
        }
        let mut face_of_dart = vec![usize::MAX; darts];
        let mut faces = Vec::new();
        for start in 0..darts {
            if face_of_dart[start] != usize::MAX {
                continue;
            }
            let mut orbit = Vec::new();
            let mut d = start;
            while face_of_dart[d] == usize::MAX {
                face_of_dart[d] = faces.len();
                orbit.push(d);
                d = next_around[d ^ 1];
            }
            faces.push(orbit);
        }
        let components = graph.kappa(&graph.all_edges());
        let euler = graph.vertex_count() as i64 - graph.edge_count() as i64 + faces.len() as i64;
        if euler != 1 + components as i64 {
            return Err(Error::InvalidParameter("rotation system is not a planar embedding".into()));
        }
        let edges = (0..graph.edge_count()).map(|e| (face_of_dart[2 * e], face_of_dart[2 * e + 1])).collect();
        let dual = Graph::with_params(faces.len(), edges, graph.params().to_vec())
            .map_err(|_| Error::InvalidParameter("bridge gives a dual self-loop".into()))?;
        Ok(Self { rotation, face_of_dart, faces, dual })
    }

    /// Rotation from straight-line vertex positions. Needs a simple graph.
    pub fn from_positions(graph: &Graph, positions: &[(f64, f64)]) -> Result<Self> {
        let rotation = (0..graph.vertex_count())
            .map(|v| {
                let mut darts: Vec<(f64, usize)> = graph
                    .incident(v)
                    .iter()
                    .map(|&(e, w)| {
                        let d = if graph.endpoints(e).0 == v { 2 * e } else { 2 * e + 1 };
                        let (dx, dy) = (positions[w].0 - positions[v].0, positions[w].1 - positions[v].1);
                        (dy.atan2(dx), d)
                    })
                    .collect();
                darts.sort_by(|a, b| a.0.total_cmp(&b.0));
                darts.into_iter().map(|(_, d)| d).collect()
            })
            .collect();
        Self::from_rotation(graph, rotation)
    }

    pub fn cycle(graph: &Graph) -> Result<Self> {
        let n = graph.vertex_count() as f64;
        let pos: Vec<(f64, f64)> = (0..graph.vertex_count())
            .map(|v| {
                let a = std::f64::consts::TAU * v as f64 / n;
                (a.cos(), a.sin())
            })
            .collect();
        Self::from_positions(graph, &pos)
    }

    /// Uses the planar coordinates stored in the graph geometry.
    pub fn planar_lattice(graph: &Graph) -> Result<Self> {
        let geo = graph.geometry().filter(|g| g.dim == 2).ok_or(Error::MissingGeometry)?;
        let pos: Vec<(f64, f64)> = geo.coords.iter().map(|c| (c[0] as f64, c[1] as f64)).collect();
        Self::from_positions(graph, &pos)
    }

    pub fn dual(&self) -> &Graph {
        &self.dual
    }

    pub fn dual_edge(&self, e: usize) -> usize {
        e
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_of_dart(&self, d: usize) -> usize {
        self.face_of_dart[d]
    }

    /// The pairing seen from the dual side; its dual graph is isomorphic to
    /// the primal, with vertex `i` carrying the darts of dual face `i`.
    pub fn dual_pairing(&self) -> Result<Self> {
        Self::from_rotation(&self.dual, self.faces.clone())
    }

    /// Checks that the double dual reproduces the primal: each of its faces
    /// carries exactly the darts of one primal vertex.
    pub fn double_dual_matches(&self, primal: &Graph) -> Result<bool> {
        let back = self.dual_pairing()?;
        if back.dual.vertex_count() != primal.vertex_count() || back.dual.edge_count() != primal.edge_count() {
            return Ok(false);
        }
        let mut matched = vec![false; primal.vertex_count()];
        for face in &back.faces {
            let mut darts = face.clone();
            darts.sort_unstable();
            let hit = self.rotation.iter().position(|rot| {
                let mut r = rot.clone();
                r.sort_unstable();
                r == darts
            });
            match hit {
                Some(v) if !matched[v] => matched[v] = true,
                _ => return Ok(false),
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c4_dual_is_four_parallel_edges() {
        let g = Graph::cycle(4);
        let pd = PlanarDualPairing::cycle(&g).unwrap();
        assert_eq!(pd.dual().vertex_count(), 2);
        assert_eq!(pd.dual().edge_count(), 4);
        assert!(pd.dual().edges().iter().all(|&(a, b)| a != b));
        assert!(pd.double_dual_matches(&g).unwrap());
    }

    #[test]
    fn grid_dual() {
        let g = Graph::grid(3, 3);
        let pd = PlanarDualPairing::planar_lattice(&g).unwrap();
        assert_eq!(pd.dual().vertex_count(), 5);
        assert_eq!(pd.dual().edge_count(), 12);
        assert!(pd.double_dual_matches(&g).unwrap());
    }

    #[test]
    fn bridge_is_rejected() {
        let g = Graph::path(3);
        assert!(PlanarDualPairing::from_positions(&g, &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]).is_err());
    }
}
