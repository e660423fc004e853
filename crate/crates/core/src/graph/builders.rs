use super::{Geometry, Graph};

impl Graph {
    pub fn single_edge() -> Graph {
        Graph::new(2, vec![(0, 1)]).unwrap()
    }

    pub fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|v| (v - 1, v)).collect()).unwrap()
    }

    /// Cycle on n ≥ 2 vertices oriented 0 → 1 → … → 0.
    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 2);
        Graph::new(n, (0..n).map(|v| (v, (v + 1) % n)).collect()).unwrap()
    }

    pub fn triangle() -> Graph {
        Graph::cycle(3)
    }

    pub fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::new(n, edges).unwrap()
    }

    /// Two vertices joined by three parallel edges.
    pub fn theta() -> Graph {
        Graph::new(2, vec![(0, 1); 3]).unwrap()
    }

    /// Z^d / (2n)Z^d with nearest-neighbour edges (v, v + e_j). Period 2
    /// produces parallel edges, kept as distinct indices.
    pub fn torus(d: usize, n: usize) -> Graph {
        assert!(d >= 1 && n >= 1);
        let side = 2 * n;
        let count = side.pow(d as u32);
        let coords_of = |mut v: usize| {
            (0..d)
                .map(|_| {
                    let c = (v % side) as i64;
                    v /= side;
                    c
                })
                .collect::<Vec<i64>>()
        };
        let index_of = |c: &[i64]| c.iter().rev().fold(0usize, |acc, &x| acc * side + x as usize);
        let mut edges = Vec::with_capacity(d * count);
        let mut displacement = Vec::with_capacity(d * count);
        for v in 0..count {
            for j in 0..d {
                let mut c = coords_of(v);
                c[j] = (c[j] + 1) % side as i64;
                edges.push((v, index_of(&c)));
                let mut unit = vec![0; d];
                unit[j] = 1;
                displacement.push(unit);
            }
        }
        let coords = (0..count).map(coords_of).collect();
        Graph::new(count, edges).unwrap().with_geometry(Geometry {
            dim: d,
            period: Some(side as i64),
            coords,
            displacement,
        })
    }

    /// The box [-n, n]^d ∩ Z^d with nearest-neighbour edges.
    pub fn box_lattice(d: usize, n: usize) -> Graph {
        let side = 2 * n + 1;
        Graph::grid_dims(&vec![side; d], -(n as i64))
    }

    /// Rectangular grid with `width × height` vertices.
    pub fn grid(width: usize, height: usize) -> Graph {
        Graph::grid_dims(&[width, height], 0)
    }

    fn grid_dims(sides: &[usize], origin: i64) -> Graph {
        let d = sides.len();
        let count: usize = sides.iter().product();
        let coords_of = |mut v: usize| {
            sides
                .iter()
                .map(|&s| {
                    let c = (v % s) as i64;
                    v /= s;
                    c
                })
                .collect::<Vec<i64>>()
        };
        let mut stride = vec![1usize; d];
        for j in 1..d {
            stride[j] = stride[j - 1] * sides[j - 1];
        }
        let mut edges = Vec::new();
        let mut displacement = Vec::new();
        for v in 0..count {
            let c = coords_of(v);
            for j in 0..d {
                if (c[j] as usize) + 1 < sides[j] {
                    edges.push((v, v + stride[j]));
                    let mut unit = vec![0; d];
                    unit[j] = 1;
                    displacement.push(unit);
                }
            }
        }
        let coords = (0..count).map(|v| coords_of(v).into_iter().map(|c| c + origin).collect()).collect();
        Graph::new(count, edges).unwrap().with_geometry(Geometry { dim: d, period: None, coords, displacement })
    }

    /// Patch of the hexagonal lattice with `rows × cols` hexagons, realised as
    /// a brick wall. Maximum degree 3.
    pub fn hex_patch(rows: usize, cols: usize) -> Graph {
        assert!(rows >= 1 && cols >= 1);
        let width = 2 * cols + usize::from(rows > 1);
        let id = |x: usize, y: usize| y * (width + 1) + x;
        let n = (width + 1) * (rows + 1);
        let mut edges = Vec::new();
        for y in 0..=rows {
            for x in 0..width {
                edges.push((id(x, y), id(x + 1, y)));
            }
        }
        for y in 0..rows {
            for x in 0..=width {
                if (x + y) % 2 == 0 {
                    edges.push((id(x, y), id(x, y + 1)));
                }
            }
        }
        // strip dangling ends until every vertex has degree 0 or at least 2
        loop {
            let mut deg = vec![0usize; n];
            for &(u, v) in &edges {
                deg[u] += 1;
                deg[v] += 1;
            }
            let before = edges.len();
            edges.retain(|&(u, v)| deg[u] > 1 && deg[v] > 1);
            if edges.len() == before {
                break;
            }
        }
        let mut relabel = vec![usize::MAX; n];
        let mut next = 0;
        for &(u, v) in &edges {
            for w in [u, v] {
                if relabel[w] == usize::MAX {
                    relabel[w] = next;
                    next += 1;
                }
            }
        }
        let edges = edges.into_iter().map(|(u, v)| (relabel[u], relabel[v])).collect();
        Graph::new(next, edges).unwrap()
    }
}
