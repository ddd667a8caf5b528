//! Counterexample search for universal formulas over [A], [Ā], [B], [E]
//! and conjunction, working on descriptor elements only.
//!
//! The negation of such a formula is an existential formula (⟨A⟩, ⟨Ā⟩,
//! ⟨B⟩, ⟨E⟩ and disjunction over propositional leaves). Whether some track
//! with a given descriptor element satisfies an existential formula depends
//! only on the element, so the search ranges over the finitely many
//! elements witnessed in the structure. Every choice of the search is
//! explored exhaustively, with results memoized per (subformula, element).

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::descriptor::DescriptorElement;
use crate::formula::{is_exists_fragment, is_forall_fragment};
use crate::formula::{to_exists_dual, CompiledFormula, Formula, FormulaError, Modality, Node, NodeId};
use crate::kripke::{Kripke, StateId, StateSet, Track};
use crate::unravel::Direction;

#[derive(Debug, Error)]
pub enum ConpError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("formula is not in the {0} fragment")]
    NotInFragment(&'static str),
    #[error("formula is not propositional")]
    NotPropositional,
}

/// Descriptor elements of the tracks starting (forward) or ending
/// (backward) in an anchor state, in breadth-first order, with one way of
/// realizing each.
#[derive(Debug, Clone)]
pub struct WitnessedElements {
    anchor: StateId,
    direction: Direction,
    order: Vec<DescriptorElement>,
    /// Element it was extended from; `None` for two-state tracks.
    parent: HashMap<DescriptorElement, Option<DescriptorElement>>,
}

impl WitnessedElements {
    pub fn anchor(&self) -> StateId {
        self.anchor
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn elements(&self) -> &[DescriptorElement] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, d: &DescriptorElement) -> bool {
        self.parent.contains_key(d)
    }

    /// A shortest track with element `d`, if `d` is witnessed here.
    pub fn realize(&self, d: &DescriptorElement) -> Option<Vec<StateId>> {
        let mut cur = *d;
        let mut chain = vec![cur];
        while let Some(p) = *self.parent.get(&cur)? {
            chain.push(p);
            cur = p;
        }
        let seed = chain.pop().expect("nonempty");
        Some(match self.direction {
            Direction::Forward => {
                let mut t = vec![seed.initial, seed.last];
                t.extend(chain.iter().rev().map(|e| e.last));
                t
            }
            Direction::Backward => {
                let mut t: Vec<StateId> = chain.iter().map(|e| e.initial).collect();
                t.push(seed.initial);
                t.push(seed.last);
                t
            }
        })
    }
}

/// Least set of elements closed under one-state extension away from the
/// anchor.
pub fn witnessed_elements(kripke: &Kripke, v: StateId, direction: Direction) -> WitnessedElements {
    let mut parent = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    let forward = direction == Direction::Forward;
    let seeds = if forward { kripke.successors(v) } else { kripke.predecessors(v) };
    for &w in seeds {
        let d = if forward {
            DescriptorElement::new(v, StateSet::EMPTY, w)
        } else {
            DescriptorElement::new(w, StateSet::EMPTY, v)
        };
        if parent.insert(d, None).is_none() {
            order.push(d);
            queue.push_back(d);
        }
    }
    while let Some(d) = queue.pop_front() {
        let (edge_end, around) =
            if forward { (d.last, kripke.successors(d.last)) } else { (d.initial, kripke.predecessors(d.initial)) };
        for &u in around {
            let internal = d.internal.with(edge_end);
            let e = if forward {
                DescriptorElement::new(d.initial, internal, u)
            } else {
                DescriptorElement::new(u, internal, d.last)
            };
            if let std::collections::hash_map::Entry::Vacant(slot) = parent.entry(e) {
                slot.insert(Some(d));
                order.push(e);
                queue.push_back(e);
            }
        }
    }
    WitnessedElements { anchor: v, direction, order, parent }
}

/// `(v'in, S' ∪ {v'fin, v''in} ∪ S'', v''fin)`.
pub fn concat_descr(a: &DescriptorElement, b: &DescriptorElement) -> DescriptorElement {
    a.concat(b)
}

/// Label shared by every track with element `d`.
fn element_label(kripke: &Kripke, d: &DescriptorElement) -> crate::kripke::PropSet {
    d.internal
        .iter()
        .fold(kripke.label(d.initial).intersection(kripke.label(d.last)), |acc, s| acc.intersection(kripke.label(s)))
}

/// Value of a propositional formula on the tracks with element `d`.
pub fn val(beta: &Formula, d: &DescriptorElement, kripke: &Kripke) -> Result<bool, ConpError> {
    if !beta.is_propositional() {
        return Err(ConpError::NotPropositional);
    }
    let c = CompiledFormula::new(beta, kripke);
    Ok(c.eval_prop(c.root(), element_label(kripke, d)))
}

/// Why an existential subformula holds on some track with an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reason {
    Prop,
    Left,
    Right,
    /// ⟨A⟩ / ⟨Ā⟩: any track with the element works.
    Neighbour,
    /// ⟨B⟩: the track minus its last state, with this element.
    BCut(DescriptorElement),
    /// ⟨B⟩: a prefix with the first element, then a track with the second.
    BSplit(DescriptorElement, DescriptorElement),
    /// ⟨E⟩: the track minus its first state, with this element.
    ECut(DescriptorElement),
    /// ⟨E⟩: a track with the first element, then a suffix with the second.
    ESplit(DescriptorElement, DescriptorElement),
}

struct Search<'k> {
    k: &'k Kripke,
    f: CompiledFormula,
    forward: Vec<Option<WitnessedElements>>,
    backward: Vec<Option<WitnessedElements>>,
    memo: HashMap<(NodeId, DescriptorElement), Option<Reason>>,
}

impl<'k> Search<'k> {
    fn new(k: &'k Kripke, existential: &Formula) -> Self {
        let n = k.num_states();
        Search {
            k,
            f: CompiledFormula::new(existential, k),
            forward: vec![None; n],
            backward: vec![None; n],
            memo: HashMap::new(),
        }
    }

    fn table(&mut self, v: StateId, dir: Direction) -> &WitnessedElements {
        let slot = match dir {
            Direction::Forward => &mut self.forward[v],
            Direction::Backward => &mut self.backward[v],
        };
        let k = self.k;
        slot.get_or_insert_with(|| witnessed_elements(k, v, dir))
    }

    fn elements(&mut self, v: StateId, dir: Direction) -> Vec<DescriptorElement> {
        self.table(v, dir).elements().to_vec()
    }

    fn exists(&mut self, n: NodeId, d: DescriptorElement) -> bool {
        self.reason(n, d).is_some()
    }

    fn reason(&mut self, n: NodeId, d: DescriptorElement) -> Option<Reason> {
        if let Some(r) = self.memo.get(&(n, d)) {
            return *r;
        }
        let r = self.compute(n, d);
        self.memo.insert((n, d), r);
        r
    }

    fn compute(&mut self, n: NodeId, d: DescriptorElement) -> Option<Reason> {
        let k = self.k;
        if self.f.is_propositional(n) {
            return self.f.eval_prop(n, element_label(k, &d)).then_some(Reason::Prop);
        }
        match self.f.node(n) {
            Node::Or(a, b) => {
                if self.exists(a, d) {
                    Some(Reason::Left)
                } else if self.exists(b, d) {
                    Some(Reason::Right)
                } else {
                    None
                }
            }
            Node::Diamond(Modality::A, a) => {
                let cands = self.elements(d.last, Direction::Forward);
                cands.into_iter().any(|e| self.exists(a, e)).then_some(Reason::Neighbour)
            }
            Node::Diamond(Modality::Abar, a) => {
                let cands = self.elements(d.initial, Direction::Backward);
                cands.into_iter().any(|e| self.exists(a, e)).then_some(Reason::Neighbour)
            }
            Node::Diamond(Modality::B, a) => {
                let firsts = self.elements(d.initial, Direction::Forward);
                for &p in &firsts {
                    // Prefix one state shorter.
                    if k.has_edge(p.last, d.last) && p.internal.with(p.last) == d.internal && self.exists(a, p) {
                        return Some(Reason::BCut(p));
                    }
                }
                for &p in &firsts {
                    if !(p.internal.with(p.last).is_subset(d.internal)) {
                        continue;
                    }
                    for &x in k.successors(p.last) {
                        if !d.internal.contains(x) {
                            continue;
                        }
                        let rests = self.elements(x, Direction::Forward);
                        for r in rests {
                            if r.last == d.last && p.concat(&r) == d && self.exists(a, p) {
                                return Some(Reason::BSplit(p, r));
                            }
                        }
                    }
                }
                None
            }
            Node::Diamond(Modality::E, a) => {
                let lasts = self.elements(d.last, Direction::Backward);
                for &s in &lasts {
                    if k.has_edge(d.initial, s.initial) && s.internal.with(s.initial) == d.internal && self.exists(a, s)
                    {
                        return Some(Reason::ECut(s));
                    }
                }
                let firsts = self.elements(d.initial, Direction::Forward);
                for &s in &lasts {
                    if !(s.internal.with(s.initial).is_subset(d.internal)) {
                        continue;
                    }
                    for &f in &firsts {
                        if k.has_edge(f.last, s.initial) && f.concat(&s) == d && self.exists(a, s) {
                            return Some(Reason::ESplit(f, s));
                        }
                    }
                }
                None
            }
            _ => unreachable!("formula checked to be existential"),
        }
    }

    /// Any track with element `d`; `d` must be witnessed from its initial
    /// state.
    fn any_track(&mut self, d: DescriptorElement) -> Vec<StateId> {
        self.table(d.initial, Direction::Forward).realize(&d).expect("witnessed element")
    }

    /// A track with element `d` satisfying node `n`; requires
    /// `exists(n, d)`.
    fn realize(&mut self, n: NodeId, d: DescriptorElement) -> Vec<StateId> {
        let reason = self.reason(n, d).expect("realize called on a failing pair");
        match (reason, self.f.node(n)) {
            (Reason::Prop | Reason::Neighbour, _) => self.any_track(d),
            (Reason::Left, Node::Or(a, _)) => self.realize(a, d),
            (Reason::Right, Node::Or(_, b)) => self.realize(b, d),
            (Reason::BCut(p), Node::Diamond(_, a)) => {
                let mut t = self.realize(a, p);
                t.push(d.last);
                t
            }
            (Reason::BSplit(p, r), Node::Diamond(_, a)) => {
                let mut t = self.realize(a, p);
                t.extend(self.any_track(r));
                t
            }
            (Reason::ECut(s), Node::Diamond(_, a)) => {
                let mut t = vec![d.initial];
                t.extend(self.realize(a, s));
                t
            }
            (Reason::ESplit(f, s), Node::Diamond(_, a)) => {
                let mut t = self.any_track(f);
                t.extend(self.realize(a, s));
                t
            }
            _ => unreachable!("reason does not match node"),
        }
    }
}

/// Whether some track with element `d` satisfies the existential formula
/// `psi`. Elements not witnessed in the structure give `false`.
pub fn check_exists(kripke: &Kripke, psi: &Formula, d: &DescriptorElement) -> Result<bool, ConpError> {
    if !is_exists_fragment(psi) {
        return Err(ConpError::NotInFragment("exists-AAbarBE"));
    }
    let mut s = Search::new(kripke, psi);
    if !s.table(d.initial, Direction::Forward).contains(d) {
        return Ok(false);
    }
    let root = s.f.root();
    Ok(s.exists(root, *d))
}

/// An initial track violating a universal formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub element: DescriptorElement,
    pub track: Track,
    /// The existential formula the track satisfies.
    pub violated: Formula,
}

/// Searches the elements witnessed from the initial state, in
/// breadth-first order, for one carrying a track that satisfies the dual of
/// `psi`. `None` means the structure satisfies `psi`.
pub fn provide_counterex(kripke: &Kripke, psi: &Formula) -> Result<Option<Counterexample>, ConpError> {
    if !is_forall_fragment(psi) {
        return Err(ConpError::NotInFragment("forall-AAbarBE"));
    }
    let dual = to_exists_dual(psi)?;
    let mut s = Search::new(kripke, &dual);
    let root = s.f.root();
    for d in s.elements(kripke.initial(), Direction::Forward) {
        if s.exists(root, d) {
            let track = Track::from_vec_unchecked(s.realize(root, d));
            return Ok(Some(Counterexample { element: d, track, violated: dual }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn k2() -> Kripke {
        Kripke::parse("states: v0 v1\ninit: v0\nlabel v0: p\nlabel v1: q\nedges: v0->v0 v0->v1 v1->v0 v1->v1\n")
            .unwrap()
    }

    #[test]
    fn closure_of_k2() {
        let k = k2();
        let w = witnessed_elements(&k, 0, Direction::Forward);
        assert_eq!(w.len(), 8);
        for d in w.elements() {
            let t = w.realize(d).unwrap();
            assert!(k.is_track(&t));
            assert_eq!(DescriptorElement::of_track(&t), *d);
            assert!(t.len() <= 6);
        }
        let b = witnessed_elements(&k, 1, Direction::Backward);
        for d in b.elements() {
            let t = b.realize(d).unwrap();
            assert_eq!(*t.last().unwrap(), 1);
            assert_eq!(DescriptorElement::of_track(&t), *d);
        }
    }

    #[test]
    fn chain_has_two_elements() {
        let k = Kripke::parse("states: a b\ninit: a\nedges: a->b b->b\n").unwrap();
        let w = witnessed_elements(&k, 0, Direction::Forward);
        assert_eq!(
            w.elements(),
            &[DescriptorElement::new(0, StateSet::EMPTY, 1), DescriptorElement::new(0, StateSet::singleton(1), 1)]
        );
    }

    #[test]
    fn small_verdicts() {
        let k = k2();
        let d = DescriptorElement::new(0, StateSet::EMPTY, 1);
        assert!(!val(&parse("p").unwrap(), &d, &k).unwrap());
        assert!(val(&parse("T").unwrap(), &d, &k).unwrap());
        assert!(check_exists(&k, &parse("<A>q").unwrap(), &d).unwrap());
        assert!(!check_exists(&k, &parse("F").unwrap(), &d).unwrap());
        assert!(provide_counterex(&k, &parse("[A]T").unwrap()).unwrap().is_none());
        let ce = provide_counterex(&k, &parse("[B]p").unwrap()).unwrap().unwrap();
        assert_eq!(ce.track.states()[0], 0);
    }
}
