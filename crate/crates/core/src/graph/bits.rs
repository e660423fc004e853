//! Fixed-length bitsets for edge and vertex subsets.

macro_rules! bitset {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name {
            words: Vec<u64>,
            len: usize,
        }

        impl $name {
            pub fn empty(len: usize) -> Self {
                Self { words: vec![0; len.div_ceil(64)], len }
            }

            pub fn full(len: usize) -> Self {
                let mut s = Self { words: vec![!0; len.div_ceil(64)], len };
                s.trim();
                s
            }

            /// Low `len` bits of `mask`; bit i is element i.
            pub fn from_mask(len: usize, mask: u64) -> Self {
                assert!(len <= 64, "from_mask needs len <= 64");
                let mut s = Self::empty(len);
                if len > 0 {
                    s.words[0] = mask;
                    s.trim();
                }
                s
            }

            pub fn to_mask(&self) -> u64 {
                assert!(self.len <= 64, "to_mask needs len <= 64");
                self.words.first().copied().unwrap_or(0)
            }

            pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, items: I) -> Self {
                let mut s = Self::empty(len);
                for i in items {
                    s.insert(i);
                }
                s
            }

            /// Size of the ground set.
            pub fn len(&self) -> usize {
                self.len
            }

            /// Number of members.
            pub fn count(&self) -> usize {
                self.words.iter().map(|w| w.count_ones() as usize).sum()
            }

            pub fn is_empty(&self) -> bool {
                self.words.iter().all(|&w| w == 0)
            }

            pub fn contains(&self, i: usize) -> bool {
                debug_assert!(i < self.len);
                self.words[i / 64] >> (i % 64) & 1 == 1
            }

            pub fn insert(&mut self, i: usize) {
                assert!(i < self.len, "index {} out of range {}", i, self.len);
                self.words[i / 64] |= 1 << (i % 64);
            }

            pub fn remove(&mut self, i: usize) {
                assert!(i < self.len, "index {} out of range {}", i, self.len);
                self.words[i / 64] &= !(1 << (i % 64));
            }

            pub fn set(&mut self, i: usize, value: bool) {
                if value {
                    self.insert(i)
                } else {
                    self.remove(i)
                }
            }

            pub fn toggle(&mut self, i: usize) {
                assert!(i < self.len, "index {} out of range {}", i, self.len);
                self.words[i / 64] ^= 1 << (i % 64);
            }

            pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
                self.words.iter().enumerate().flat_map(|(k, &w)| {
                    let mut w = w;
                    std::iter::from_fn(move || {
                        if w == 0 {
                            return None;
                        }
                        let b = w.trailing_zeros() as usize;
                        w &= w - 1;
                        Some(k * 64 + b)
                    })
                })
            }

            pub fn union(&self, other: &Self) -> Self {
                self.zip(other, |a, b| a | b)
            }

            pub fn intersection(&self, other: &Self) -> Self {
                self.zip(other, |a, b| a & b)
            }

            pub fn symmetric_difference(&self, other: &Self) -> Self {
                self.zip(other, |a, b| a ^ b)
            }

            pub fn difference(&self, other: &Self) -> Self {
                self.zip(other, |a, b| a & !b)
            }

            pub fn complement(&self) -> Self {
                let mut s = Self { words: self.words.iter().map(|w| !w).collect(), len: self.len };
                s.trim();
                s
            }

            pub fn union_with(&mut self, other: &Self) {
                assert_eq!(self.len, other.len, "ground sets differ");
                for (a, b) in self.words.iter_mut().zip(&other.words) {
                    *a |= b;
                }
            }

            pub fn symmetric_difference_with(&mut self, other: &Self) {
                assert_eq!(self.len, other.len, "ground sets differ");
                for (a, b) in self.words.iter_mut().zip(&other.words) {
                    *a ^= b;
                }
            }

            pub fn is_subset(&self, other: &Self) -> bool {
                assert_eq!(self.len, other.len, "ground sets differ");
                self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
            }

            fn zip(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Self {
                assert_eq!(self.len, other.len, "ground sets differ");
                Self {
                    words: self.words.iter().zip(&other.words).map(|(&a, &b)| op(a, b)).collect(),
                    len: self.len,
                }
            }

            fn trim(&mut self) {
                let r = self.len % 64;
                if r != 0 {
                    if let Some(last) = self.words.last_mut() {
                        *last &= (1u64 << r) - 1;
                    }
                }
            }
        }

        impl std::fmt::Debug for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.debug_set().entries(self.iter()).finish()
            }
        }
    };
}

bitset!(
    /// Subset of the edge indices of a graph (or of the k-cells of a complex).
    EdgeSet
);
bitset!(
    /// Subset of the vertices of a graph.
    VertexSet
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra_over_word_boundary() {
        let a = EdgeSet::from_indices(70, [0, 63, 64, 69]);
        let b = EdgeSet::from_indices(70, [63, 65]);
        assert_eq!(a.union(&b).count(), 5);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![63]);
        assert_eq!(a.symmetric_difference(&b).count(), 4);
        assert_eq!(a.complement().count(), 66);
        assert!(!a.complement().contains(69));
        assert_eq!(EdgeSet::full(70).count(), 70);
    }

    #[test]
    fn mask_round_trip() {
        let s = EdgeSet::from_mask(5, 0b10110);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 2, 4]);
        assert_eq!(s.to_mask(), 0b10110);
        assert_eq!(EdgeSet::from_mask(3, 0xff).to_mask(), 0b111);
    }
}
