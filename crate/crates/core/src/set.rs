//! Finite subsets of `{0, .., universe - 1}`.
//!
//! Used both for sets of poset elements and for members of a field of sets.
//! Two subsets are only comparable when they live in the same universe.

use std::cmp::Ordering;
use std::fmt;

use fixedbitset::FixedBitSet;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subset(FixedBitSet);

impl Subset {
    pub fn empty(universe: usize) -> Self {
        Subset(FixedBitSet::with_capacity(universe))
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        Subset(bits)
    }

    /// Builds a subset from indices. Panics on an index outside the universe.
    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn singleton(universe: usize, i: usize) -> Self {
        Self::from_indices(universe, [i])
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.universe(), "index {i} outside universe {}", self.universe());
        self.0.insert(i);
    }

    pub fn remove(&mut self, i: usize) {
        self.0.set(i, false);
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.ones().next()
    }

    pub fn union(&self, other: &Subset) -> Subset {
        let mut out = self.clone();
        out.0.union_with(&other.0);
        out
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        let mut out = self.clone();
        out.0.intersect_with(&other.0);
        out
    }

    pub fn difference(&self, other: &Subset) -> Subset {
        let mut out = self.clone();
        out.0.difference_with(&other.0);
        out
    }

    pub fn complement(&self) -> Subset {
        let mut out = self.clone();
        out.0.toggle_range(..);
        out
    }

    pub fn union_with(&mut self, other: &Subset) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &Subset) {
        self.0.intersect_with(&other.0);
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &Subset) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn intersects(&self, other: &Subset) -> bool {
        !self.is_disjoint(other)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.universe()
            .cmp(&other.universe())
            .then_with(|| self.len().cmp(&other.len()))
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}/{}", self.universe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = Subset::from_indices(5, [0, 1, 3]);
        let b = Subset::from_indices(5, [1, 4]);
        assert_eq!(a.union(&b).to_vec(), vec![0, 1, 3, 4]);
        assert_eq!(a.intersection(&b).to_vec(), vec![1]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 3]);
        assert_eq!(a.complement().to_vec(), vec![2, 4]);
        assert!(Subset::from_indices(5, [1]).is_subset(&a));
        assert!(a.intersects(&b));
        assert_eq!(a.to_string(), "{0,1,3}");
        assert_eq!(Subset::full(3).len(), 3);
        assert!(Subset::empty(3).is_empty());
    }

    #[test]
    fn ordering_is_by_size_then_lexicographic() {
        let mut v = vec![
            Subset::from_indices(3, [0, 1]),
            Subset::from_indices(3, [2]),
            Subset::empty(3),
            Subset::from_indices(3, [0]),
        ];
        v.sort();
        let shown: Vec<String> = v.iter().map(|s| s.to_string()).collect();
        assert_eq!(shown, ["{}", "{0}", "{2}", "{0,1}"]);
    }
}
