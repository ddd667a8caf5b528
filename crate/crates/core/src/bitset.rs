//! Fixed-width bit sets used for state sets and proposition labels.

use std::fmt;

/// Largest index a [`BitSet`] can hold, exclusive.
pub const MAX_BITS: usize = 128;

/// A set of small indices packed into a `u128`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct BitSet(u128);

impl BitSet {
    pub const EMPTY: BitSet = BitSet(0);

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_BITS);
        BitSet(1u128 << i)
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_BITS);
        if n == MAX_BITS {
            BitSet(u128::MAX)
        } else {
            BitSet((1u128 << n) - 1)
        }
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn from_bits(bits: u128) -> Self {
        BitSet(bits)
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_BITS && self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u128 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u128 << i);
    }

    #[must_use]
    pub fn with(self, i: usize) -> Self {
        BitSet(self.0 | 1u128 << i)
    }

    pub fn union(self, other: BitSet) -> Self {
        BitSet(self.0 | other.0)
    }

    pub fn intersection(self, other: BitSet) -> Self {
        BitSet(self.0 & other.0)
    }

    pub fn difference(self, other: BitSet) -> Self {
        BitSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: BitSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> Iter {
        Iter(self.0)
    }
}

impl FromIterator<usize> for BitSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = BitSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Ascending iterator over the members of a [`BitSet`].
pub struct Iter(u128);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_operations() {
        let a: BitSet = [0, 3, 127].into_iter().collect();
        let b: BitSet = [3, 4].into_iter().collect();
        assert_eq!(a.union(b).iter().collect::<Vec<_>>(), vec![0, 3, 4, 127]);
        assert_eq!(a.intersection(b).iter().collect::<Vec<_>>(), vec![3]);
        assert!(BitSet::singleton(3).is_subset(a));
        assert!(!b.is_subset(a));
        assert_eq!(BitSet::full(128).len(), 128);
        assert_eq!(BitSet::full(5).len(), 5);
    }
}
