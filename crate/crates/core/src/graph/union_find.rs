//! Disjoint-set forests: a plain one for cluster counting, and one that tracks
//! universal-cover offsets so that loops wrapping a torus can be detected.

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n], components: n }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns true when a and b were in different components.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Component label per element, labels dense in `0..components` and
    /// ordered by first appearance.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut label = vec![usize::MAX; n];
        let mut out = vec![0; n];
        let mut next = 0;
        for v in 0..n {
            let r = self.find(v);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            out[v] = label[r];
        }
        out
    }
}

/// Union-find whose nodes remember their displacement from the root in the
/// universal cover of a torus. Closing a cycle with a nonzero displacement
/// mismatch means the cycle wraps.
#[derive(Clone, Debug)]
pub struct WrapUnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    offset: Vec<i64>,
    dim: usize,
    wraps: Vec<bool>,
}

impl WrapUnionFind {
    pub fn new(n: usize, dim: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
            offset: vec![0; n * dim],
            dim,
            wraps: vec![false; dim],
        }
    }

    fn off(&self, x: usize) -> &[i64] {
        &self.offset[x * self.dim..(x + 1) * self.dim]
    }

    /// Root of x and the cover displacement pos(x) - pos(root).
    pub fn find(&mut self, x: usize) -> (usize, Vec<i64>) {
        let mut path = Vec::new();
        let mut root = x;
        while self.parent[root] != root {
            path.push(root);
            root = self.parent[root];
        }
        // Walk back down from the node nearest the root, accumulating offsets.
        for &node in path.iter().rev() {
            let p = self.parent[node];
            if p != root {
                for j in 0..self.dim {
                    self.offset[node * self.dim + j] += self.offset[p * self.dim + j];
                }
            }
            self.parent[node] = root;
        }
        (root, self.off(x).to_vec())
    }

    /// Joins along an edge with pos(v) = pos(u) + displacement. If u and v
    /// were already connected, returns the mismatch vector (zero for a
    /// contractible closure).
    pub fn union(&mut self, u: usize, v: usize, displacement: &[i64]) -> Option<Vec<i64>> {
        let (ru, ou) = self.find(u);
        let (rv, ov) = self.find(v);
        let delta: Vec<i64> = (0..self.dim).map(|j| ou[j] + displacement[j] - ov[j]).collect();
        if ru == rv {
            for (j, &m) in delta.iter().enumerate() {
                if m != 0 {
                    self.wraps[j] = true;
                }
            }
            return Some(delta);
        }
        let (child, root, sign) = match self.rank[ru].cmp(&self.rank[rv]) {
            std::cmp::Ordering::Less => (ru, rv, -1),
            _ => (rv, ru, 1),
        };
        if self.rank[ru] == self.rank[rv] {
            self.rank[root] += 1;
        }
        self.parent[child] = root;
        for (j, d) in delta.iter().enumerate() {
            self.offset[child * self.dim + j] = sign * d;
        }
        None
    }

    /// Directions in which some processed cycle wrapped.
    pub fn wraps(&self) -> &[bool] {
        &self.wraps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_components() {
        let mut uf = UnionFind::new(5);
        uf.union(0, 1);
        uf.union(3, 4);
        uf.union(1, 0);
        assert_eq!(uf.components(), 3);
        assert_eq!(uf.labels(), vec![0, 0, 1, 2, 2]);
    }

    #[test]
    fn ring_of_four_wraps() {
        // 1-d torus of period 4 as a ring
        let mut uf = WrapUnionFind::new(4, 1);
        for v in 0..3 {
            assert!(uf.union(v, v + 1, &[1]).is_none());
        }
        assert_eq!(uf.union(3, 0, &[1]), Some(vec![4]));
        assert_eq!(uf.wraps(), &[true]);
    }

    #[test]
    fn contractible_square_does_not_wrap() {
        let mut uf = WrapUnionFind::new(4, 2);
        uf.union(0, 1, &[1, 0]);
        uf.union(1, 2, &[0, 1]);
        uf.union(3, 2, &[1, 0]);
        assert_eq!(uf.union(0, 3, &[0, 1]), Some(vec![0, 0]));
        assert_eq!(uf.wraps(), &[false, false]);
    }
}
