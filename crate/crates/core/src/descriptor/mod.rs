//! Descriptor elements, descriptor sequences and clusters, the
//! k-indistinguishability relation, the cluster scan, and B_k-descriptors.
//!
//! For a track `v0 v1 .. vn`, element `i` of its descriptor sequence is
//! `(v0, intstates(v0 .. v(i+1)), v(i+1))`.

mod bounds;
mod indist;
mod scan;
mod summary;
mod tree;

use std::collections::BTreeSet;
use std::fmt::Write as _;

pub use bounds::{delm_bound, epsilon, tau, tau_usize, zero_termination_bound};
pub use indist::Indistinguishability;
pub use scan::{scan, scan_reference, CaseCounts, Configuration, Level, ScanCase, ScanCursor, ScanStep};
pub use summary::{summarize, DescriptorInterner, Summary};
pub use tree::{build_bk_descriptor, estimate_nodes, BkDescriptor, DescriptorError};

use crate::kripke::{intstates, Kripke, StateId, StateSet};

/// A triple `(initial, internal, last)` summarising a track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DescriptorElement {
    pub initial: StateId,
    pub internal: StateSet,
    pub last: StateId,
}

impl DescriptorElement {
    pub fn new(initial: StateId, internal: StateSet, last: StateId) -> Self {
        DescriptorElement { initial, internal, last }
    }

    /// The element of a track.
    pub fn of_track(states: &[StateId]) -> Self {
        assert!(states.len() >= 2, "tracks have length at least 2");
        DescriptorElement { initial: states[0], internal: intstates(states), last: states[states.len() - 1] }
    }

    /// Type-2 elements have their last state among the internal ones.
    pub fn is_type2(&self) -> bool {
        self.internal.contains(self.last)
    }

    /// The relation `d Rt e` iff `internal(d) + last(d)` is a subset of
    /// `internal(e)`.
    pub fn rt(&self, other: &DescriptorElement) -> bool {
        self.internal.with(self.last).is_subset(other.internal)
    }

    /// Element of the concatenation of a track for `self` with a track for
    /// `other`.
    pub fn concat(&self, other: &DescriptorElement) -> DescriptorElement {
        DescriptorElement {
            initial: self.initial,
            internal: self.internal.union(other.internal).with(self.last).with(other.initial),
            last: other.last,
        }
    }

    /// `(v0,{v1,v2},v3)` with state names.
    pub fn display(&self, k: &Kripke) -> String {
        format!("({},{},{})", k.state_name(self.initial), k.format_state_set(self.internal), k.state_name(self.last))
    }
}

/// Maximal run of positions holding Type-2 elements with a common internal
/// set, together with the distinct elements in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Distinct members, sorted.
    pub members: Vec<DescriptorElement>,
    /// First position of the run.
    pub start: usize,
    /// Last position of the run, inclusive.
    pub end: usize,
}

impl Cluster {
    pub fn contains(&self, d: &DescriptorElement) -> bool {
        self.members.binary_search(d).is_ok()
    }
}

/// The descriptor sequence of a track.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorSequence {
    elements: Vec<DescriptorElement>,
}

impl DescriptorSequence {
    pub fn of_track(states: &[StateId]) -> Self {
        assert!(states.len() >= 2, "tracks have length at least 2");
        let v0 = states[0];
        let mut internal = StateSet::EMPTY;
        let mut elements = Vec::with_capacity(states.len() - 1);
        for i in 1..states.len() {
            if i >= 2 {
                internal.insert(states[i - 1]);
            }
            elements.push(DescriptorElement::new(v0, internal, states[i]));
        }
        DescriptorSequence { elements }
    }

    pub fn from_elements(elements: Vec<DescriptorElement>) -> Self {
        DescriptorSequence { elements }
    }

    pub fn elements(&self) -> &[DescriptorElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Distinct elements of the sequence.
    pub fn delm(&self) -> BTreeSet<DescriptorElement> {
        self.elements.iter().copied().collect()
    }

    /// Clusters in order of occurrence.
    pub fn clusters(&self) -> Vec<Cluster> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.elements.len() {
            let d = self.elements[i];
            if !d.is_type2() {
                i += 1;
                continue;
            }
            let mut j = i;
            while j + 1 < self.elements.len()
                && self.elements[j + 1].is_type2()
                && self.elements[j + 1].internal == d.internal
            {
                j += 1;
            }
            let members: BTreeSet<_> = self.elements[i..=j].iter().copied().collect();
            out.push(Cluster { members: members.into_iter().collect(), start: i, end: j });
            i = j + 1;
        }
        out
    }

    /// Single-line dump with cluster spans in square brackets.
    pub fn display_inline(&self, k: &Kripke) -> String {
        let clusters = self.clusters();
        let mut out = String::new();
        for (i, d) in self.elements.iter().enumerate() {
            if clusters.iter().any(|c| c.start == i) {
                out.push('[');
            }
            out.push_str(&d.display(k));
            if clusters.iter().any(|c| c.end == i) {
                out.push(']');
            }
        }
        out
    }

    /// One element per line, prefixed by its position; cluster spans open
    /// with `[` and close with `]`.
    pub fn display_lines(&self, k: &Kripke) -> String {
        let clusters = self.clusters();
        let mut out = String::new();
        for (i, d) in self.elements.iter().enumerate() {
            let open = if clusters.iter().any(|c| c.start == i) { "[" } else { " " };
            let close = if clusters.iter().any(|c| c.end == i) { "]" } else { "" };
            let _ = writeln!(out, "{i:>4} {open}{}{close}", d.display(k));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> Kripke {
        Kripke::parse(
            "states: v0 v1 v2 v3\ninit: v0\n\
             edges: v0->v0 v0->v1 v0->v2 v1->v2 v1->v3 v2->v1 v2->v2 v2->v3 v3->v2 v3->v3\n",
        )
        .unwrap()
    }

    #[test]
    fn sequence_clusters_and_delm() {
        let k = four();
        let t = k.parse_track("v0 v0 v0 v1 v2 v1 v2 v3 v3 v2 v2").unwrap();
        let seq = DescriptorSequence::of_track(t.states());
        assert_eq!(seq.len(), 10);
        assert_eq!(seq.delm().len(), 9);
        let spans: Vec<_> = seq.clusters().iter().map(|c| (c.start, c.end, c.members.len())).collect();
        assert_eq!(spans, vec![(1, 1, 1), (4, 5, 2), (7, 9, 2)]);
    }

    #[test]
    fn element_relations() {
        let a = DescriptorElement::new(0, [0usize, 1].into_iter().collect(), 1);
        let b = DescriptorElement::new(0, [0usize, 1, 2].into_iter().collect(), 2);
        assert!(a.is_type2());
        assert!(a.rt(&b));
        assert!(!b.rt(&a));
        let c = DescriptorElement::new(3, StateSet::EMPTY, 2);
        assert_eq!(a.concat(&c), DescriptorElement::new(0, [0usize, 1, 3].into_iter().collect(), 2));
    }
}
