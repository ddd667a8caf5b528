//! The cluster scan: arrays `Q(-2) .. Q(s)` tracking, for each element of a
//! cluster, how indistinguishable its last occurrence is from the one
//! before.
//!
//! `Q(-2)` holds elements not yet seen in the span, `Q(-1)` first
//! occurrences, `Q(0)` occurrences not 1-indistinguishable from their
//! predecessor, and `Q(t)` exactly t-indistinguishable ones (`Q(s)` absorbs
//! everything from `s` up).

use super::{Cluster, DescriptorElement, DescriptorSequence, Indistinguishability};

/// Array index of an element: `-2 ..= s`.
pub type Level = i32;

/// Cardinalities of `Q(-2) .. Q(s)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(pub Vec<usize>);

impl std::fmt::Display for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Scan state after one position of the cluster span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanStep {
    /// Position in the descriptor sequence.
    pub position: usize,
    pub element: DescriptorElement,
    /// Array now holding `element`.
    pub level: Level,
    /// Array of every cluster member, in member order.
    pub levels: Vec<Level>,
    pub configuration: Configuration,
}

/// Which case of the update rule fired at a position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanCase {
    /// First occurrence in the span.
    A,
    /// Second occurrence, not 1-indistinguishable.
    B,
    /// Later occurrence, not 1-indistinguishable.
    C,
    /// t-indistinguishable, coming from an array below `t`.
    D,
    /// t-indistinguishable, coming from an array at or above `t`.
    E,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CaseCounts {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
    pub e: usize,
}

impl CaseCounts {
    fn record(&mut self, c: ScanCase) {
        match c {
            ScanCase::A => self.a += 1,
            ScanCase::B => self.b += 1,
            ScanCase::C => self.c += 1,
            ScanCase::D => self.d += 1,
            ScanCase::E => self.e += 1,
        }
    }
}

/// Incremental scan over one cluster span.
///
/// The next occurrence of an element lands one array above the one it
/// currently sits in, and every other element at or above that array is
/// pulled down to it. No indistinguishability test is needed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanCursor<K> {
    seen: Vec<(K, Level)>,
}

impl<K: Copy + Eq> ScanCursor<K> {
    pub fn new() -> Self {
        ScanCursor { seen: Vec::new() }
    }

    pub fn reset(&mut self) {
        self.seen.clear();
    }

    /// Array currently holding `key`; `-2` if unseen.
    pub fn level(&self, key: K) -> Level {
        self.seen.iter().find(|(k, _)| *k == key).map_or(-2, |&(_, l)| l)
    }

    /// Records an occurrence of `key` and returns its new array, capped at
    /// `cap`.
    pub fn advance(&mut self, key: K, cap: Level) -> Level {
        let new = (self.level(key) + 1).min(cap);
        for entry in &mut self.seen {
            if entry.1 >= new {
                entry.1 = new;
            }
        }
        match self.seen.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = new,
            None => self.seen.push((key, new)),
        }
        new
    }

    pub fn entries(&self) -> &[(K, Level)] {
        &self.seen
    }
}

fn configuration(levels: &[Level], s: usize) -> Configuration {
    let mut counts = vec![0; s + 3];
    for &l in levels {
        counts[(l + 2) as usize] += 1;
    }
    Configuration(counts)
}

/// Runs the incremental scan over a cluster span with arrays up to `Q(s)`.
pub fn scan(seq: &DescriptorSequence, cluster: &Cluster, s: usize) -> Vec<ScanStep> {
    let mut cursor = ScanCursor::new();
    let elems = seq.elements();
    (cluster.start..=cluster.end)
        .map(|pos| {
            let d = elems[pos];
            let level = cursor.advance(d, s as Level);
            let levels: Vec<Level> = cluster.members.iter().map(|m| cursor.level(*m)).collect();
            let configuration = configuration(&levels, s);
            ScanStep { position: pos, element: d, level, levels, configuration }
        })
        .collect()
}

/// Runs the scan by its case-by-case definition, deciding each case from
/// the recursive indistinguishability relation, and counts which cases
/// fire.
pub fn scan_reference(
    seq: &DescriptorSequence,
    cluster: &Cluster,
    s: usize,
    indist: &mut Indistinguishability<'_>,
) -> (Vec<ScanStep>, CaseCounts) {
    let elems = seq.elements();
    let m = &cluster.members;
    let idx = |d: &DescriptorElement| m.binary_search(d).expect("element belongs to the cluster");
    let mut levels = vec![-2 as Level; m.len()];
    let mut counts = CaseCounts::default();
    let mut steps = Vec::new();
    for (pos, &d) in elems.iter().enumerate().take(cluster.end + 1).skip(cluster.start) {
        let di = idx(&d);
        let cur = levels[di];
        let t = indist.exact_level(pos, s);
        let case = if pos == cluster.start {
            levels[di] = -1;
            ScanCase::A
        } else if cur == -2 {
            for l in levels.iter_mut().filter(|l| **l >= -1) {
                *l = -1;
            }
            levels[di] = -1;
            ScanCase::A
        } else if t == 0 && cur == -1 {
            for l in levels.iter_mut().filter(|l| **l >= 0) {
                *l = 0;
            }
            levels[di] = 0;
            ScanCase::B
        } else if t == 0 {
            levels[di] = 0;
            ScanCase::C
        } else if cur < t {
            for l in levels.iter_mut().filter(|l| **l >= t) {
                *l = t;
            }
            levels[di] = t;
            ScanCase::D
        } else {
            levels[di] = t;
            ScanCase::E
        };
        counts.record(case);
        let configuration = configuration(&levels, s);
        steps.push(ScanStep { position: pos, element: d, level: levels[di], levels: levels.clone(), configuration });
    }
    (steps, counts)
}
