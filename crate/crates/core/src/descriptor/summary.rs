//! Incremental B_j-descriptor identifiers.
//!
//! Descriptors are hash-consed level by level: the id of a track at level
//! `j` is determined by its descriptor element and the set of level `j-1`
//! ids of its proper prefixes. Extending a track by one state therefore
//! only needs the ids of the track itself, which makes the ids cheap to
//! maintain along a depth-first walk.

use std::collections::HashMap;
use std::rc::Rc;

use super::DescriptorElement;
use crate::kripke::StateId;

/// Hash-consing tables for descriptor ids, one per level.
/// Root element and sorted child ids of a descriptor at one level.
type Key = (DescriptorElement, Rc<[u32]>);

#[derive(Debug, Default)]
pub struct DescriptorInterner {
    levels: Vec<HashMap<Key, u32>>,
}

impl DescriptorInterner {
    pub fn new() -> Self {
        Self::default()
    }

    fn id(&mut self, level: usize, elem: DescriptorElement, kids: &Rc<[u32]>) -> u32 {
        while self.levels.len() <= level {
            self.levels.push(HashMap::new());
        }
        let table = &mut self.levels[level];
        let next = table.len() as u32;
        *table.entry((elem, kids.clone())).or_insert(next)
    }

    /// Number of distinct descriptors seen at `level`.
    pub fn distinct(&self, level: usize) -> usize {
        self.levels.get(level).map_or(0, |t| t.len())
    }
}

/// Descriptor ids of one track at levels `0..=max_level`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    elem: DescriptorElement,
    ids: Vec<u32>,
    /// `kids[j - 1]`: sorted level `j-1` ids of the proper prefixes.
    kids: Vec<Rc<[u32]>>,
}

impl Summary {
    /// Summary of the track `v u`.
    pub fn start(interner: &mut DescriptorInterner, max_level: usize, v: StateId, u: StateId) -> Self {
        let elem = DescriptorElement::of_track(&[v, u]);
        let empty: Rc<[u32]> = Rc::from(Vec::new());
        let ids = (0..=max_level).map(|j| interner.id(j, elem, &empty)).collect();
        Summary { elem, ids, kids: vec![empty; max_level] }
    }

    /// Summary of this track extended by `u`, keeping levels up to
    /// `max_level` (at most [`Summary::max_level`]).
    pub fn extend(&self, interner: &mut DescriptorInterner, max_level: usize, u: StateId) -> Self {
        debug_assert!(max_level <= self.max_level());
        let elem = DescriptorElement {
            initial: self.elem.initial,
            internal: self.elem.internal.with(self.elem.last),
            last: u,
        };
        let empty: Rc<[u32]> = Rc::from(Vec::new());
        let mut ids = Vec::with_capacity(max_level + 1);
        let mut kids = Vec::with_capacity(max_level);
        ids.push(interner.id(0, elem, &empty));
        for j in 1..=max_level {
            let old = &self.kids[j - 1];
            let add = self.ids[j - 1];
            let set: Rc<[u32]> = match old.binary_search(&add) {
                Ok(_) => old.clone(),
                Err(pos) => {
                    let mut v = Vec::with_capacity(old.len() + 1);
                    v.extend_from_slice(&old[..pos]);
                    v.push(add);
                    v.extend_from_slice(&old[pos..]);
                    Rc::from(v)
                }
            };
            ids.push(interner.id(j, elem, &set));
            kids.push(set);
        }
        Summary { elem, ids, kids }
    }

    pub fn element(&self) -> DescriptorElement {
        self.elem
    }

    pub fn max_level(&self) -> usize {
        self.ids.len() - 1
    }

    /// Id of the B_level-descriptor.
    pub fn id(&self, level: usize) -> u32 {
        self.ids[level]
    }
}

/// Summaries of every prefix of length at least two, shortest first.
pub fn summarize(interner: &mut DescriptorInterner, max_level: usize, track: &[StateId]) -> Vec<Summary> {
    assert!(track.len() >= 2, "tracks have length at least 2");
    let mut chain = Vec::with_capacity(track.len() - 1);
    chain.push(Summary::start(interner, max_level, track[0], track[1]));
    for &u in &track[2..] {
        let next = chain.last().expect("nonempty").extend(interner, max_level, u);
        chain.push(next);
    }
    chain
}
