//! Representative-track enumeration.
//!
//! [`Direction::Forward`] walks tracks from a state depth-first, successors
//! in declaration order, and cuts a branch as soon as its newest descriptor
//! element is k-indistinguishable from the previous occurrence of the same
//! element (for `k = 0`: as soon as any element repeats). Every track it
//! reaches is emitted, so for every B_k-descriptor of a track from the
//! start state some emitted track has that descriptor.
//!
//! [`Direction::Backward`] emits the tracks ending in a state that contain
//! no k-indistinguishable pair. It runs the forward walk from each state in
//! declaration order and keeps the tracks that end in the target.
//! [`backward_by_reverse_search`] produces the same set by extending tracks
//! leftwards and testing every candidate from scratch; it is exponential in
//! the length cap and serves as a reference.

use std::cell::RefCell;
use std::collections::HashSet;
use std::rc::Rc;

use crate::descriptor::{
    tau_usize, zero_termination_bound, DescriptorInterner, DescriptorSequence, Level, ScanCursor, Summary,
};
use crate::kripke::{Kripke, StateId, StateSet, Track};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Default length cap: `2 + |W|^2` for `k = 0`, `tau(|W|, k)` otherwise.
pub fn default_cap(kripke: &Kripke, budget: usize) -> usize {
    let w = kripke.num_states();
    if budget == 0 {
        zero_termination_bound(w)
    } else {
        tau_usize(w, budget)
    }
}

/// Level at or above which a repeated element is cut.
fn threshold(budget: usize) -> Level {
    budget as Level
}

#[derive(Debug, Clone)]
struct Frame {
    next: usize,
    internal: StateSet,
    cluster: Option<StateSet>,
    cursor: ScanCursor<StateId>,
}

/// Depth-first forward enumeration from one state.
#[derive(Debug, Clone)]
pub struct ForwardUnravel<'k> {
    kripke: &'k Kripke,
    budget: usize,
    cap: usize,
    path: Vec<StateId>,
    frames: Vec<Frame>,
}

impl<'k> ForwardUnravel<'k> {
    pub fn new(kripke: &'k Kripke, from: StateId, budget: usize) -> Self {
        Self::with_cap(kripke, from, budget, default_cap(kripke, budget))
    }

    pub fn with_cap(kripke: &'k Kripke, from: StateId, budget: usize, cap: usize) -> Self {
        ForwardUnravel {
            kripke,
            budget,
            cap,
            path: vec![from],
            frames: vec![Frame { next: 0, internal: StateSet::EMPTY, cluster: None, cursor: ScanCursor::new() }],
        }
    }

    /// Advances to the next emitted track.
    pub fn next_track(&mut self) -> Option<&[StateId]> {
        let threshold = threshold(self.budget);
        loop {
            let top = self.frames.last_mut()?;
            let last = *self.path.last().expect("path is never empty while frames remain");
            let succ = self.kripke.successors(last);
            if top.next >= succ.len() || self.path.len() >= self.cap {
                self.frames.pop();
                self.path.pop();
                continue;
            }
            let u = succ[top.next];
            top.next += 1;
            let internal = if self.path.len() >= 2 { top.internal.with(last) } else { StateSet::EMPTY };
            let (cluster, cursor, level) = if internal.contains(u) {
                let mut cursor = if top.cluster == Some(internal) { top.cursor.clone() } else { ScanCursor::new() };
                let level = cursor.advance(u, threshold);
                (Some(internal), cursor, level)
            } else {
                (None, ScanCursor::new(), -1)
            };
            if level >= threshold {
                continue;
            }
            self.path.push(u);
            self.frames.push(Frame { next: 0, internal, cluster, cursor });
            return Some(&self.path);
        }
    }

    /// Skips the descendants of the track returned last.
    pub fn skip_subtree(&mut self) {
        if self.path.len() >= 2 {
            if let Some(top) = self.frames.last_mut() {
                top.next = usize::MAX;
            }
        }
    }
}

impl Iterator for ForwardUnravel<'_> {
    type Item = Track;

    fn next(&mut self) -> Option<Track> {
        self.next_track().map(|t| Track::from_vec_unchecked(t.to_vec()))
    }
}

/// Representative tracks ending in a state: forward walks from every state,
/// filtered by their last state.
#[derive(Debug, Clone)]
pub struct BackwardUnravel<'k> {
    kripke: &'k Kripke,
    target: StateId,
    budget: usize,
    cap: usize,
    start: StateId,
    inner: Option<ForwardUnravel<'k>>,
}

impl<'k> BackwardUnravel<'k> {
    pub fn new(kripke: &'k Kripke, to: StateId, budget: usize) -> Self {
        Self::with_cap(kripke, to, budget, default_cap(kripke, budget))
    }

    pub fn with_cap(kripke: &'k Kripke, to: StateId, budget: usize, cap: usize) -> Self {
        BackwardUnravel { kripke, target: to, budget, cap, start: 0, inner: None }
    }

    pub fn next_track(&mut self) -> Option<&[StateId]> {
        loop {
            if self.inner.is_none() {
                if self.start >= self.kripke.num_states() {
                    return None;
                }
                self.inner = Some(ForwardUnravel::with_cap(self.kripke, self.start, self.budget, self.cap));
                self.start += 1;
            }
            let inner = self.inner.as_mut().expect("set above");
            match inner.next_track() {
                Some(t) if *t.last().expect("nonempty") == self.target => {
                    // Re-borrow to satisfy the borrow checker.
                    return self.inner.as_ref().map(|i| i.path.as_slice());
                }
                Some(_) => {}
                None => self.inner = None,
            }
        }
    }
}

impl Iterator for BackwardUnravel<'_> {
    type Item = Track;

    fn next(&mut self) -> Option<Track> {
        self.next_track().map(|t| Track::from_vec_unchecked(t.to_vec()))
    }
}

/// Either direction behind one type.
#[derive(Debug, Clone)]
pub enum Unravel<'k> {
    Forward(ForwardUnravel<'k>),
    Backward(BackwardUnravel<'k>),
}

impl<'k> Unravel<'k> {
    pub fn next_track(&mut self) -> Option<&[StateId]> {
        match self {
            Unravel::Forward(f) => f.next_track(),
            Unravel::Backward(b) => b.next_track(),
        }
    }
}

impl Iterator for Unravel<'_> {
    type Item = Track;

    fn next(&mut self) -> Option<Track> {
        match self {
            Unravel::Forward(f) => f.next(),
            Unravel::Backward(b) => b.next(),
        }
    }
}

/// Lazy stream of representatives from (forward) or into (backward) `v`
/// for budget `k`.
pub fn unravel(kripke: &Kripke, v: StateId, k: usize, dir: Direction) -> Unravel<'_> {
    match dir {
        Direction::Forward => Unravel::Forward(ForwardUnravel::new(kripke, v, k)),
        Direction::Backward => Unravel::Backward(BackwardUnravel::new(kripke, v, k)),
    }
}

/// How a [`SummaryUnravel`] cuts branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pruning {
    /// At k-indistinguishable pairs: the same tracks as [`ForwardUnravel`].
    Indistinguishable,
    /// At tracks whose B_k-descriptor the walk has already reached. One
    /// track per descriptor; every such track is also emitted under
    /// [`Pruning::Indistinguishable`].
    #[default]
    Descriptor,
}

/// A depth-first walk that also carries the descriptor ids of every prefix
/// of the current track, up to level `budget`.
///
/// Forward walks start in one state. Backward walks run a forward walk from
/// every state in declaration order and report the tracks ending in the
/// target.
#[derive(Debug)]
pub struct SummaryUnravel<'k> {
    kripke: &'k Kripke,
    interner: Rc<RefCell<DescriptorInterner>>,
    budget: usize,
    cap: usize,
    pruning: Pruning,
    target: Option<StateId>,
    next_start: StateId,
    path: Vec<StateId>,
    chain: Vec<Summary>,
    frames: Vec<Frame>,
    seen: HashSet<u32>,
}

impl<'k> SummaryUnravel<'k> {
    fn new(
        kripke: &'k Kripke,
        interner: Rc<RefCell<DescriptorInterner>>,
        budget: usize,
        pruning: Pruning,
        target: Option<StateId>,
    ) -> Self {
        let cap = match pruning {
            Pruning::Indistinguishable => default_cap(kripke, budget),
            // Finitely many descriptors: the walk stops on its own.
            Pruning::Descriptor => usize::MAX,
        };
        SummaryUnravel {
            kripke,
            interner,
            budget,
            cap,
            pruning,
            target,
            next_start: 0,
            path: Vec::new(),
            chain: Vec::new(),
            frames: Vec::new(),
            seen: HashSet::new(),
        }
    }

    pub fn forward(
        kripke: &'k Kripke,
        interner: Rc<RefCell<DescriptorInterner>>,
        from: StateId,
        budget: usize,
        pruning: Pruning,
    ) -> Self {
        let mut u = Self::new(kripke, interner, budget, pruning, None);
        u.restart(from);
        u.next_start = kripke.num_states();
        u
    }

    pub fn backward(
        kripke: &'k Kripke,
        interner: Rc<RefCell<DescriptorInterner>>,
        to: StateId,
        budget: usize,
        pruning: Pruning,
    ) -> Self {
        Self::new(kripke, interner, budget, pruning, Some(to))
    }

    fn restart(&mut self, from: StateId) {
        self.path.clear();
        self.chain.clear();
        self.seen.clear();
        self.path.push(from);
        self.frames.push(Frame { next: 0, internal: StateSet::EMPTY, cluster: None, cursor: ScanCursor::new() });
    }

    /// Advances to the next emitted track; returns it with the summaries of
    /// its prefixes, shortest first.
    pub fn next_track(&mut self) -> Option<(&[StateId], &[Summary])> {
        let threshold = threshold(self.budget);
        loop {
            let Some(top) = self.frames.last_mut() else {
                if self.next_start >= self.kripke.num_states() {
                    return None;
                }
                let s = self.next_start;
                self.next_start += 1;
                self.restart(s);
                continue;
            };
            let last = *self.path.last().expect("path is never empty while frames remain");
            let succ = self.kripke.successors(last);
            if top.next >= succ.len() || self.path.len() >= self.cap {
                self.frames.pop();
                self.path.pop();
                self.chain.pop();
                continue;
            }
            let u = succ[top.next];
            top.next += 1;
            let internal = if self.path.len() >= 2 { top.internal.with(last) } else { StateSet::EMPTY };
            let (cluster, cursor) = match self.pruning {
                Pruning::Indistinguishable if internal.contains(u) => {
                    let mut cursor = if top.cluster == Some(internal) { top.cursor.clone() } else { ScanCursor::new() };
                    if cursor.advance(u, threshold) >= threshold {
                        continue;
                    }
                    (Some(internal), cursor)
                }
                _ => (None, ScanCursor::new()),
            };
            let summary = {
                let mut interner = self.interner.borrow_mut();
                match self.chain.last() {
                    Some(s) => s.extend(&mut interner, self.budget, u),
                    None => Summary::start(&mut interner, self.budget, last, u),
                }
            };
            if self.pruning == Pruning::Descriptor && !self.seen.insert(summary.id(self.budget)) {
                continue;
            }
            self.path.push(u);
            self.chain.push(summary);
            self.frames.push(Frame { next: 0, internal, cluster, cursor });
            if self.target.map_or(true, |t| t == u) {
                return Some((&self.path, &self.chain));
            }
        }
    }
}

/// Whether the descriptor sequence of `states` has a pair of
/// k-indistinguishable occurrences (for `k = 0`: a repeated element),
/// scanning left to right.
pub fn has_indistinguishable_pair(states: &[StateId], k: usize) -> bool {
    let seq = DescriptorSequence::of_track(states);
    let threshold = threshold(k);
    let mut cursor = ScanCursor::new();
    let mut cluster = None;
    for d in seq.elements() {
        if !d.is_type2() {
            cluster = None;
            continue;
        }
        if cluster != Some(d.internal) {
            cursor.reset();
            cluster = Some(d.internal);
        }
        if cursor.advance(d.last, threshold) >= threshold {
            return true;
        }
    }
    false
}

/// Tracks of length at most `cap` ending in `v` without a
/// k-indistinguishable pair, found by extending leftwards along reversed
/// edges (predecessors in declaration order) and testing each candidate in
/// full.
pub fn backward_by_reverse_search(kripke: &Kripke, v: StateId, k: usize, cap: usize) -> Vec<Track> {
    fn go(kripke: &Kripke, rev: &mut Vec<StateId>, k: usize, cap: usize, out: &mut Vec<Track>) {
        if rev.len() >= cap {
            return;
        }
        let head = *rev.last().expect("nonempty");
        for &p in kripke.predecessors(head) {
            rev.push(p);
            let track: Vec<StateId> = rev.iter().rev().copied().collect();
            if !has_indistinguishable_pair(&track, k) {
                out.push(Track::from_vec_unchecked(track));
            }
            go(kripke, rev, k, cap, out);
            rev.pop();
        }
    }
    let mut out = Vec::new();
    go(kripke, &mut vec![v], k, cap, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn k2() -> Kripke {
        Kripke::parse("states: v0 v1\ninit: v0\nlabel v0: p\nlabel v1: q\nedges: v0->v0 v0->v1 v1->v0 v1->v1\n")
            .unwrap()
    }

    #[test]
    fn self_loop_zero_budget() {
        let k = Kripke::parse("states: v\ninit: v\nedges: v->v\n").unwrap();
        let ts: Vec<_> = unravel(&k, 0, 0, Direction::Forward).map(|t| t.into_vec()).collect();
        assert_eq!(ts, vec![vec![0, 0], vec![0, 0, 0]]);
    }

    #[test]
    fn k2_zero_budget_covers_all_elements() {
        let k = k2();
        let ts: Vec<Track> = unravel(&k, 0, 0, Direction::Forward).collect();
        assert!(ts.iter().all(|t| t.len() <= 6));
        let elems: BTreeSet<_> =
            ts.iter().map(|t| crate::descriptor::DescriptorElement::of_track(t.states())).collect();
        assert_eq!(elems.len(), 8);
    }

    #[test]
    fn backward_matches_reverse_search() {
        let k = k2();
        for budget in 0..=1 {
            for v in 0..2 {
                let fast: BTreeSet<Track> = unravel(&k, v, budget, Direction::Backward).collect();
                let slow: BTreeSet<Track> = backward_by_reverse_search(&k, v, budget, 12).into_iter().collect();
                assert_eq!(fast, slow, "budget {budget}, target {v}");
            }
        }
    }

    fn summary_tracks(
        k: &Kripke,
        v: StateId,
        budget: usize,
        pruning: Pruning,
        backward: bool,
    ) -> Vec<(Vec<StateId>, u32)> {
        let interner = Rc::new(RefCell::new(DescriptorInterner::new()));
        let mut u = if backward {
            SummaryUnravel::backward(k, interner, v, budget, pruning)
        } else {
            SummaryUnravel::forward(k, interner, v, budget, pruning)
        };
        let mut out = Vec::new();
        while let Some((t, c)) = u.next_track() {
            assert_eq!(c.len() + 1, t.len());
            out.push((t.to_vec(), c.last().unwrap().id(budget)));
        }
        out
    }

    #[test]
    fn summary_walk_matches_plain_walks() {
        let k = Kripke::parse("states: a b c\ninit: a\nedges: a->b a->c b->b b->a c->a\n").unwrap();
        for budget in 0..=2 {
            for v in 0..3 {
                let plain: Vec<Vec<StateId>> = ForwardUnravel::new(&k, v, budget).map(|t| t.into_vec()).collect();
                let with: Vec<Vec<StateId>> = summary_tracks(&k, v, budget, Pruning::Indistinguishable, false)
                    .into_iter()
                    .map(|(t, _)| t)
                    .collect();
                assert_eq!(plain, with);
                let plain: Vec<Vec<StateId>> = BackwardUnravel::new(&k, v, budget).map(|t| t.into_vec()).collect();
                let with: Vec<Vec<StateId>> = summary_tracks(&k, v, budget, Pruning::Indistinguishable, true)
                    .into_iter()
                    .map(|(t, _)| t)
                    .collect();
                assert_eq!(plain, with);
            }
        }
    }

    #[test]
    fn descriptor_pruning_keeps_one_track_per_descriptor() {
        let k = k2();
        for budget in 0..=2 {
            let all = summary_tracks(&k, 0, budget, Pruning::Indistinguishable, false);
            let few = summary_tracks(&k, 0, budget, Pruning::Descriptor, false);
            let all_tracks: BTreeSet<_> = all.iter().map(|(t, _)| t.clone()).collect();
            let all_ids: BTreeSet<u32> = all.iter().map(|(_, d)| *d).collect();
            let few_ids: BTreeSet<u32> = few.iter().map(|(_, d)| *d).collect();
            assert_eq!(few_ids.len(), few.len());
            assert!(few.iter().all(|(t, _)| all_tracks.contains(t)));
            // Interners differ between the two runs; compare through trees.
            let canon = |t: &[StateId]| {
                crate::descriptor::build_bk_descriptor(t, budget, u128::MAX).unwrap().canonical().to_string()
            };
            let a: BTreeSet<String> = all.iter().map(|(t, _)| canon(t)).collect();
            let b: BTreeSet<String> = few.iter().map(|(t, _)| canon(t)).collect();
            assert_eq!(a, b);
            assert_eq!(all_ids.len(), a.len());
        }
    }

    #[test]
    fn skip_subtree_prunes_descendants() {
        let k = k2();
        let mut u = ForwardUnravel::new(&k, 0, 0);
        let first = u.next_track().unwrap().to_vec();
        assert_eq!(first, vec![0, 0]);
        u.skip_subtree();
        let second = u.next_track().unwrap().to_vec();
        assert_eq!(second, vec![0, 1]);
    }
}
