//! Equivalence relations on `{0, ..., n-1}` as canonical block assignments,
//! plus general binary relations for the cases where an equivalence is not
//! guaranteed.

use std::collections::HashMap;
use std::fmt;

/// An equivalence relation stored as `element -> block id`.
///
/// Block ids are assigned in order of first occurrence, so two partitions
/// are equal as values exactly when they are equal as set partitions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<u32>,
    blocks: usize,
}

impl Partition {
    /// Canonicalizes an arbitrary labeling.
    pub fn from_labels<T: Copy + Eq + std::hash::Hash>(labels: &[T]) -> Partition {
        let mut ids: HashMap<T, u32> = HashMap::new();
        let labels: Vec<u32> = labels
            .iter()
            .map(|l| {
                let next = ids.len() as u32;
                *ids.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            blocks: ids.len(),
            labels,
        }
    }

    /// Builds a partition from explicit blocks; elements not mentioned become
    /// singletons. Returns `None` if an element is out of range or repeated.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Option<Partition> {
        let mut raw: Vec<usize> = (0..n).map(|x| blocks.len() + x).collect();
        let mut seen = vec![false; n];
        for (b, block) in blocks.iter().enumerate() {
            for &x in block {
                if x >= n || seen[x] {
                    return None;
                }
                seen[x] = true;
                raw[x] = b;
            }
        }
        Some(Partition::from_labels(&raw))
    }

    pub fn identity(n: usize) -> Partition {
        Partition {
            labels: (0..n as u32).collect(),
            blocks: n,
        }
    }

    pub fn total(n: usize) -> Partition {
        Partition {
            labels: vec![0; n],
            blocks: usize::from(n > 0),
        }
    }

    /// The equivalence with blocks `subset` and its complement.
    pub fn two_block(n: usize, subset: &[bool]) -> Partition {
        debug_assert_eq!(subset.len(), n);
        Partition::from_labels(subset)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.labels[x] as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    pub fn is_identity(&self) -> bool {
        self.blocks == self.labels.len()
    }

    pub fn is_total(&self) -> bool {
        self.blocks <= 1
    }

    /// Blocks in id order, members ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (x, &b) in self.labels.iter().enumerate() {
            out[b as usize].push(x);
        }
        out
    }

    /// Smallest element of each block, in block order.
    pub fn representatives(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.blocks);
        for (x, &b) in self.labels.iter().enumerate() {
            if b as usize == out.len() {
                out.push(x);
            }
        }
        out
    }

    /// `self ⊆ other` as relations.
    pub fn refines(&self, other: &Partition) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut image = vec![u32::MAX; self.blocks];
        for (x, &b) in self.labels.iter().enumerate() {
            let slot = &mut image[b as usize];
            if *slot == u32::MAX {
                *slot = other.labels[x];
            } else if *slot != other.labels[x] {
                return false;
            }
        }
        true
    }

    /// Intersection of the two relations.
    pub fn meet(&self, other: &Partition) -> Partition {
        assert_eq!(self.len(), other.len());
        let pairs: Vec<(u32, u32)> = self
            .labels
            .iter()
            .zip(&other.labels)
            .map(|(&a, &b)| (a, b))
            .collect();
        Partition::from_labels(&pairs)
    }

    /// Least equivalence containing both relations.
    pub fn join(&self, other: &Partition) -> Partition {
        assert_eq!(self.len(), other.len());
        let mut uf = UnionFind::new(self.len());
        for part in [self, other] {
            for block in part.blocks() {
                for w in block.windows(2) {
                    uf.union(w[0], w[1]);
                }
            }
        }
        uf.to_partition()
    }

    /// True when `subset` is a union of blocks.
    pub fn saturates(&self, subset: &[bool]) -> bool {
        let mut state = vec![None; self.blocks];
        for (x, &b) in self.labels.iter().enumerate() {
            match state[b as usize] {
                None => state[b as usize] = Some(subset[x]),
                Some(s) if s != subset[x] => return false,
                _ => {}
            }
        }
        true
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, block) in self.blocks().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("{")?;
            for (j, x) in block.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if the two classes were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    pub fn to_partition(&mut self) -> Partition {
        let roots: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Partition::from_labels(&roots)
    }
}

/// A binary relation on `{0, ..., n-1}` as a dense boolean matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    n: usize,
    bits: Vec<bool>,
}

impl Relation {
    pub fn new(n: usize) -> Relation {
        Relation {
            n,
            bits: vec![false; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Relation {
        let mut r = Relation::new(n);
        for a in 0..n {
            for b in 0..n {
                r.bits[a * n + b] = f(a, b);
            }
        }
        r
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.n + b]
    }

    pub fn insert(&mut self, a: usize, b: usize) {
        self.bits[a * self.n + b] = true;
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n * self.n)
            .filter(|&i| self.bits[i])
            .map(|i| (i / self.n, i % self.n))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|a| self.contains(a, a))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(a, b)| self.contains(b, a))
    }

    pub fn is_transitive(&self) -> bool {
        for (a, b) in self.pairs() {
            for c in 0..self.n {
                if self.contains(b, c) && !self.contains(a, c) {
                    return false;
                }
            }
        }
        true
    }

    /// The relation as a partition, if it is an equivalence.
    pub fn to_partition(&self) -> Option<Partition> {
        if !(self.is_reflexive() && self.is_symmetric() && self.is_transitive()) {
            return None;
        }
        let labels: Vec<usize> = (0..self.n)
            .map(|a| (0..self.n).find(|&b| self.contains(a, b)).unwrap_or(a))
            .collect();
        Some(Partition::from_labels(&labels))
    }
}

impl From<&Partition> for Relation {
    fn from(p: &Partition) -> Relation {
        Relation::from_fn(p.len(), |a, b| p.related(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_labels() {
        let p = Partition::from_labels(&[7, 3, 7, 9]);
        assert_eq!(p.labels(), &[0, 1, 0, 2]);
        assert_eq!(p, Partition::from_labels(&['b', 'a', 'b', 'c']));
        assert_eq!(p.blocks(), vec![vec![0, 2], vec![1], vec![3]]);
        assert_eq!(p.representatives(), vec![0, 1, 3]);
        assert_eq!(
            Partition::from_blocks(4, &[vec![2, 0]]).unwrap(),
            Partition::from_labels(&[0, 1, 0, 2])
        );
        assert!(Partition::from_blocks(2, &[vec![0, 0]]).is_none());
    }

    #[test]
    fn lattice_operations() {
        let a = Partition::from_labels(&[0, 0, 1, 1]);
        let b = Partition::from_labels(&[0, 1, 1, 2]);
        assert_eq!(a.meet(&b), Partition::identity(4));
        assert_eq!(a.join(&b), Partition::total(4));
        assert!(Partition::identity(4).refines(&a));
        assert!(a.refines(&Partition::total(4)));
        assert!(!a.refines(&b));
        assert!(a.saturates(&[true, true, false, false]));
        assert!(!a.saturates(&[true, false, false, false]));
    }

    #[test]
    fn relation_round_trip() {
        let p = Partition::from_labels(&[0, 1, 0]);
        let r = Relation::from(&p);
        assert_eq!(r.to_partition(), Some(p));
        let mut r = Relation::new(2);
        r.insert(0, 1);
        assert_eq!(r.to_partition(), None);
    }
}
