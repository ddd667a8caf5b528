//! Exact evaluation through finite automata.
//!
//! Read a track as a word over the alphabet of states. For every formula
//! the set of tracks satisfying it is a regular language, and each
//! modality is a standard automaton construction: ⟨A⟩ and ⟨Ā⟩ depend only
//! on the first or last letters of the words in the argument's language,
//! ⟨B⟩ and ⟨E⟩ ask for a proper prefix or suffix in it, ⟨B̄⟩ and ⟨Ē⟩ for a
//! proper extension. A structure satisfies a formula iff the automaton of
//! its negation accepts no word that starts with the initial state.
//!
//! No length bound is involved, so the result is exact for every formula,
//! E included.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use super::bounded::{OracleError, OracleVerdict, EXPANSION_LIMIT};
use crate::formula::{try_expand, CompiledFormula, Formula, Modality, Node, NodeId};
use crate::kripke::{Kripke, StateId, Track};

/// Complete deterministic automaton over the states of a structure; state 0
/// is initial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    letters: usize,
    trans: Vec<u32>,
    accept: Vec<bool>,
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.accept.len()
    }

    fn step(&self, q: usize, a: usize) -> usize {
        self.trans[q * self.letters + a] as usize
    }

    pub fn accepts(&self, word: &[StateId]) -> bool {
        self.accept[word.iter().fold(0, |q, &a| self.step(q, a))]
    }

    /// Explores the states reachable from `init` under `step` and builds
    /// the minimal automaton of the result.
    fn build<K: Clone + Eq + Hash>(
        letters: usize,
        init: K,
        step: impl Fn(&K, usize) -> K,
        accept: impl Fn(&K) -> bool,
    ) -> Dfa {
        let mut ids: HashMap<K, u32> = HashMap::new();
        let mut keys = vec![init.clone()];
        ids.insert(init, 0);
        let mut trans = Vec::new();
        let mut i = 0;
        while i < keys.len() {
            for a in 0..letters {
                let next = step(&keys[i], a);
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = keys.len() as u32;
                        ids.insert(next.clone(), id);
                        keys.push(next);
                        id
                    }
                };
                trans.push(id);
            }
            i += 1;
        }
        let accept = keys.iter().map(accept).collect();
        Dfa { letters, trans, accept }.minimize()
    }

    /// Moore partition refinement.
    fn minimize(&self) -> Dfa {
        let n = self.num_states();
        let mut class: Vec<u32> = self.accept.iter().map(|&a| a as u32).collect();
        let mut count = 0;
        loop {
            let mut sig_ids: HashMap<Vec<u32>, u32> = HashMap::new();
            let mut next = Vec::with_capacity(n);
            for q in 0..n {
                let mut sig = Vec::with_capacity(self.letters + 1);
                sig.push(class[q]);
                sig.extend((0..self.letters).map(|a| class[self.step(q, a)]));
                let fresh = sig_ids.len() as u32;
                next.push(*sig_ids.entry(sig).or_insert(fresh));
            }
            let new_count = sig_ids.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        // Renumber so the initial state's class is 0, in discovery order.
        let mut order: HashMap<u32, u32> = HashMap::new();
        let mut reps = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        order.insert(class[0], 0);
        reps.push(0);
        while let Some(q) = queue.pop_front() {
            for a in 0..self.letters {
                let r = self.step(q, a);
                if let std::collections::hash_map::Entry::Vacant(slot) = order.entry(class[r]) {
                    slot.insert(reps.len() as u32);
                    reps.push(r);
                    queue.push_back(r);
                }
            }
        }
        let mut trans = Vec::with_capacity(reps.len() * self.letters);
        for &q in &reps {
            for a in 0..self.letters {
                trans.push(order[&class[self.step(q, a)]]);
            }
        }
        let accept = reps.iter().map(|&q| self.accept[q]).collect();
        Dfa { letters: self.letters, trans, accept }
    }

    /// States from which some nonempty word leads to acceptance.
    fn live_after_step(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut live = vec![false; n];
        let mut changed = true;
        while changed {
            changed = false;
            for q in 0..n {
                if live[q] {
                    continue;
                }
                if (0..self.letters).any(|a| {
                    let r = self.step(q, a);
                    self.accept[r] || live[r]
                }) {
                    live[q] = true;
                    changed = true;
                }
            }
        }
        live
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(q) = stack.pop() {
            for a in 0..self.letters {
                let r = self.step(q, a);
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        seen
    }

    /// A shortest accepted word, smallest letters first among those.
    pub fn shortest_word(&self) -> Option<Vec<StateId>> {
        let n = self.num_states();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(q) = queue.pop_front() {
            if self.accept[q] {
                let mut word = Vec::new();
                let mut cur = q;
                while let Some((p, a)) = parent[cur] {
                    word.push(a);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            for a in 0..self.letters {
                let r = self.step(q, a);
                if !seen[r] {
                    seen[r] = true;
                    parent[r] = Some((q, a));
                    queue.push_back(r);
                }
            }
        }
        None
    }
}

/// Position in the track automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Pos {
    Start,
    One(StateId),
    Many(StateId),
    Dead,
}

fn track_step(k: &Kripke, p: Pos, a: usize) -> Pos {
    match p {
        Pos::Start => Pos::One(a),
        Pos::One(v) | Pos::Many(v) if k.has_edge(v, a) => Pos::Many(a),
        _ => Pos::Dead,
    }
}

/// Builds the automaton of every subformula bottom-up.
pub struct Automata<'k> {
    k: &'k Kripke,
    f: CompiledFormula,
    dfas: Vec<Option<Dfa>>,
}

impl<'k> Automata<'k> {
    pub fn new(k: &'k Kripke, formula: &Formula) -> Result<Self, OracleError> {
        let expanded = try_expand(formula, EXPANSION_LIMIT)?;
        let f = CompiledFormula::new(&expanded, k);
        let n = f.len();
        Ok(Automata { k, f, dfas: vec![None; n] })
    }

    /// Automaton of the whole formula.
    pub fn root(&mut self) -> &Dfa {
        let r = self.f.root();
        self.dfa(r);
        self.dfas[r].as_ref().expect("built")
    }

    /// Tracks satisfying `pred` at every state.
    fn homogeneous(&self, pred: impl Fn(StateId) -> bool) -> Dfa {
        let k = self.k;
        Dfa::build(
            k.num_states(),
            Pos::Start,
            |&p, a| if pred(a) { track_step(k, p, a) } else { Pos::Dead },
            |p| matches!(p, Pos::Many(_)),
        )
    }

    /// Tracks in the language of `inner` joined with `outer` by `op`.
    fn with_tracks(&self, inner: &Dfa, op: impl Fn(bool) -> bool) -> Dfa {
        let k = self.k;
        Dfa::build(
            k.num_states(),
            (Pos::Start, 0usize),
            |&(p, q), a| (track_step(k, p, a), inner.step(q, a)),
            |&(p, q)| matches!(p, Pos::Many(_)) && op(inner.accept[q]),
        )
    }

    fn dfa(&mut self, n: NodeId) {
        if self.dfas[n].is_some() {
            return;
        }
        let k = self.k;
        let letters = k.num_states();
        let d = match self.f.node(n) {
            Node::Top => self.homogeneous(|_| true),
            Node::Bottom => self.homogeneous(|_| false),
            Node::Prop(p) => self.homogeneous(|s| p.is_some_and(|p| k.label(s).contains(p))),
            Node::Not(a) => {
                self.dfa(a);
                let inner = self.dfas[a].take().expect("built");
                let d = self.with_tracks(&inner, |x| !x);
                self.dfas[a] = Some(inner);
                d
            }
            Node::And(a, b) | Node::Or(a, b) => {
                self.dfa(a);
                self.dfa(b);
                let and = matches!(self.f.node(n), Node::And(..));
                let (x, y) = (self.dfas[a].as_ref().expect("built"), self.dfas[b].as_ref().expect("built"));
                Dfa::build(
                    letters,
                    (0usize, 0usize),
                    |&(p, q), c| (x.step(p, c), y.step(q, c)),
                    |&(p, q)| if and { x.accept[p] && y.accept[q] } else { x.accept[p] || y.accept[q] },
                )
            }
            Node::Diamond(m, a) => {
                self.dfa(a);
                self.diamond(m, a)
            }
            Node::Boxed(m, a) => {
                // [X]a = ¬⟨X⟩¬a on tracks.
                self.dfa(a);
                let inner = self.dfas[a].as_ref().expect("built");
                let neg = self.with_tracks(inner, |x| !x);
                let dia = self.modal(m, &neg);
                self.with_tracks(&dia, |x| !x)
            }
        };
        self.dfas[n] = Some(d);
    }

    fn diamond(&self, m: Modality, a: NodeId) -> Dfa {
        self.modal(m, self.dfas[a].as_ref().expect("built"))
    }

    /// Tracks satisfying ⟨m⟩ of the language of `x` (a set of tracks).
    fn modal(&self, m: Modality, x: &Dfa) -> Dfa {
        let k = self.k;
        let letters = k.num_states();
        let live = x.live_after_step();
        let tracks_where = |ok: &dyn Fn(Pos, StateId) -> bool| {
            Dfa::build(
                letters,
                (Pos::Start, None::<StateId>),
                |&(p, first), a| (track_step(k, p, a), first.or(Some(a))),
                |&(p, first)| matches!(p, Pos::Many(_)) && ok(p, first.expect("set after one letter")),
            )
        };
        match m {
            Modality::A => {
                // Some word of x starts with the last letter.
                let starts: Vec<bool> = (0..letters).map(|a| live[x.step(0, a)]).collect();
                tracks_where(&|p, _| matches!(p, Pos::Many(v) if starts[v]))
            }
            Modality::Abar => {
                // Some word of x ends with the first letter.
                let reach = x.reachable();
                let ends: Vec<bool> =
                    (0..letters).map(|a| (0..x.num_states()).any(|q| reach[q] && x.accept[x.step(q, a)])).collect();
                tracks_where(&|_, first| ends[first])
            }
            Modality::B => Dfa::build(
                letters,
                (Pos::Start, 0usize, false),
                |&(p, q, seen), a| (track_step(k, p, a), x.step(q, a), seen || x.accept[q]),
                |&(p, _, seen)| matches!(p, Pos::Many(_)) && seen,
            ),
            Modality::Bbar => Dfa::build(
                letters,
                (Pos::Start, 0usize),
                |&(p, q), a| (track_step(k, p, a), x.step(q, a)),
                |&(p, q)| matches!(p, Pos::Many(_)) && live[q],
            ),
            Modality::E => Dfa::build(
                letters,
                (Pos::Start, Vec::<u32>::new()),
                |(p, runs), a| {
                    let mut next: Vec<u32> = if *p == Pos::Start {
                        Vec::new()
                    } else {
                        runs.iter().chain(std::iter::once(&0)).map(|&q| x.step(q as usize, a) as u32).collect()
                    };
                    next.sort_unstable();
                    next.dedup();
                    (track_step(k, *p, a), next)
                },
                |(p, runs)| matches!(p, Pos::Many(_)) && runs.iter().any(|&q| x.accept[q as usize]),
            ),
            Modality::Ebar => {
                // States reached by a nonempty prefix.
                let mut starts: Vec<u32> = Vec::new();
                let mut seen = vec![false; x.num_states()];
                let mut stack: Vec<usize> = (0..letters).map(|a| x.step(0, a)).collect();
                while let Some(q) = stack.pop() {
                    if !seen[q] {
                        seen[q] = true;
                        starts.push(q as u32);
                        stack.extend((0..letters).map(|a| x.step(q, a)));
                    }
                }
                starts.sort_unstable();
                Dfa::build(
                    letters,
                    (Pos::Start, starts),
                    |(p, runs), a| {
                        let mut next: Vec<u32> = runs.iter().map(|&q| x.step(q as usize, a) as u32).collect();
                        next.sort_unstable();
                        next.dedup();
                        (track_step(k, *p, a), next)
                    },
                    |(p, runs)| matches!(p, Pos::Many(_)) && runs.iter().any(|&q| x.accept[q as usize]),
                )
            }
            _ => unreachable!("derived modalities are desugared"),
        }
    }
}

/// Exact truth of `formula` on `track`.
pub fn exact_eval(kripke: &Kripke, track: &[StateId], formula: &Formula) -> Result<bool, OracleError> {
    Ok(Automata::new(kripke, formula)?.root().accepts(track))
}

/// Exact structure-level check. The counterexample is a shortest initial
/// track violating the formula.
pub fn exact_mod_check(kripke: &Kripke, formula: &Formula) -> Result<OracleVerdict, OracleError> {
    let negated = Formula::not(formula.clone());
    let mut automata = Automata::new(kripke, &negated)?;
    let bad = automata.root();
    let w0 = kripke.initial();
    // Words of `bad` starting with the initial state.
    let initial = Dfa::build(
        kripke.num_states(),
        (0usize, false, true),
        |&(q, started, ok), a| (bad.step(q, a), true, ok && (started || a == w0)),
        |&(q, _, ok)| ok && bad.accept[q],
    );
    Ok(match initial.shortest_word() {
        Some(w) => OracleVerdict { holds: false, counterexample: Some(Track::from_vec_unchecked(w)) },
        None => OracleVerdict { holds: true, counterexample: None },
    })
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
    fn k2_track_verdicts() {
        let k = k2();
        let ev = |t: &str, f: &str| exact_eval(&k, k.parse_track(t).unwrap().states(), &parse(f).unwrap()).unwrap();
        assert!(ev("v0 v1 v0 v1", "<A>q"));
        assert!(!ev("v0 v1 v0", "<A>q"));
        assert!(ev("v0 v1 v0 v1", "<Ai>p"));
        assert!(!ev("v1 v0 v1", "<Ai>p"));
        assert!(ev("v0 v0 v0 v1 v0", "<B>(<A>q & <B><A>p)"));
        assert!(!ev("v0 v1 v0 v0 v0", "<B>(<A>q & <B><A>p)"));
        assert!(ev("v0 v0 v0", "<E>p"));
        assert!(!ev("v0 v0", "<E>p"));
        assert!(ev("v1 v0", "<Bi>(<E>q)"));
        assert!(ev("v1 v1", "<Ei>(<B>p)"));
        assert!(!ev("v1 v1", "<Ei>(p)"));
    }

    #[test]
    fn structure_level() {
        let k = k2();
        assert!(exact_mod_check(&k, &parse("T").unwrap()).unwrap().holds);
        let v = exact_mod_check(&k, &parse("p").unwrap()).unwrap();
        assert_eq!(v.counterexample.unwrap().states(), &[0, 1]);
        assert!(!exact_mod_check(&k, &parse("[B]F").unwrap()).unwrap().holds);
    }
}
