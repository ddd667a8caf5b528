//! The k-indistinguishability relation on occurrences of a descriptor
//! sequence, evaluated by its recursive definition.

use std::collections::{HashMap, HashSet};

use super::{DescriptorElement, Level};

/// Memoised evaluator of k-indistinguishability over one sequence.
///
/// Occurrences `i < j` of the same element are 1-indistinguishable when the
/// elements before `i` and before `j` form the same set, and
/// k-indistinguishable when every position in `i..j` is
/// (k-1)-indistinguishable from some position before `i`.
pub struct Indistinguishability<'a> {
    seq: &'a [DescriptorElement],
    distinct_before: Vec<usize>,
    previous: Vec<Option<usize>>,
    memo: HashMap<(usize, usize, usize), bool>,
}

impl<'a> Indistinguishability<'a> {
    pub fn new(seq: &'a [DescriptorElement]) -> Self {
        let mut seen = HashSet::new();
        let mut distinct_before = Vec::with_capacity(seq.len() + 1);
        let mut last_at = HashMap::new();
        let mut previous = Vec::with_capacity(seq.len());
        for (i, d) in seq.iter().enumerate() {
            distinct_before.push(seen.len());
            seen.insert(*d);
            previous.push(last_at.insert(*d, i));
        }
        distinct_before.push(seen.len());
        Indistinguishability { seq, distinct_before, previous, memo: HashMap::new() }
    }

    /// Whether positions `i < j` hold the same element and are
    /// k-indistinguishable. Requires `k >= 1`.
    pub fn is_k_indistinguishable(&mut self, i: usize, j: usize, k: usize) -> bool {
        assert!(k >= 1, "indistinguishability starts at k = 1");
        if i >= j || self.seq[i] != self.seq[j] {
            return false;
        }
        if k == 1 {
            // Prefix element sets only grow, so equal sizes mean equal sets.
            return self.distinct_before[i] == self.distinct_before[j];
        }
        if let Some(&r) = self.memo.get(&(i, j, k)) {
            return r;
        }
        let r = (i..j).all(|l| (0..i).any(|lp| self.is_k_indistinguishable(lp, l, k - 1)));
        self.memo.insert((i, j, k), r);
        r
    }

    /// Previous position holding the same element as `j`.
    pub fn previous(&self, j: usize) -> Option<usize> {
        self.previous[j]
    }

    /// How indistinguishable occurrence `j` is from the previous occurrence
    /// of its element: `-1` for a first occurrence, `0` when not even
    /// 1-indistinguishable, otherwise the largest `t <= cap` for which it is
    /// t-indistinguishable.
    pub fn exact_level(&mut self, j: usize, cap: usize) -> Level {
        let Some(i) = self.previous[j] else {
            return -1;
        };
        let mut t = 0;
        while t < cap && self.is_k_indistinguishable(i, j, t + 1) {
            t += 1;
        }
        t as Level
    }
}
