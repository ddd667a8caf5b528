//! Model checking by track representatives, for formulas over A, Ā, B, B̄
//! and Ē.
//!
//! [`mod_check`] walks representatives of the initial tracks and evaluates
//! the formula on each. Evaluation recurses on the formula: ⟨A⟩ and ⟨Ā⟩
//! range over the representatives ending after / starting before the
//! current track, ⟨B⟩ over its prefixes, ⟨B̄⟩ and Ē over its one-state
//! extensions and its concatenations with representatives.
//!
//! Every subformula is evaluated with the smallest budget it needs, its own
//! B-nesting depth, and results are cached by (subformula, descriptor id):
//! the truth of a subformula of B-nesting `j` only depends on the
//! B_j-descriptor of the track.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::num::NonZeroUsize;
use std::rc::Rc;
use std::sync::atomic::{AtomicUsize, Ordering};

use lru::LruCache;
use num_bigint::BigUint;
use thiserror::Error;

use crate::descriptor::{summarize, tau, DescriptorElement, DescriptorInterner, Summary};
use crate::formula::{try_expand, CompiledFormula, Formula, FormulaError, Modality, Node, NodeId};
use crate::kripke::{Kripke, PropSet, StateId, Track};
use crate::unravel::{Pruning, SummaryUnravel};

/// Largest expanded formula the checker accepts, in nodes.
pub const EXPANSION_LIMIT: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("the representative engine does not handle <E>/[E]")]
    ContainsE,
    #[error("tau({states}, {budget}) = {tau} exceeds the ceiling {ceiling}")]
    TauTooLarge { states: usize, budget: usize, tau: BigUint, ceiling: u128 },
}

/// Outcome of [`mod_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    /// An initial track falsifying the formula; present iff `!holds`.
    pub counterexample: Option<Track>,
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    /// Worker threads for the top-level walk.
    pub jobs: usize,
    /// Capacity of the (subformula, descriptor) result cache.
    pub cache_capacity: usize,
    /// Refuse to run when `tau(|W|, nest_b)` exceeds this.
    pub max_tau: Option<u128>,
    pub mode: Mode,
}

/// How representatives are enumerated and how ⟨B̄⟩ is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Walks cut at k-indistinguishable pairs. ⟨B̄⟩ tries each one-state
    /// extension, then each concatenation with a representative from that
    /// state.
    Literal,
    /// Walks cut at repeated descriptors. ⟨B̄⟩ explores the descriptors of
    /// all right extensions once, as a graph, and settles every explored
    /// descriptor at the same time.
    #[default]
    Quotient,
}

impl Mode {
    fn pruning(self) -> Pruning {
        match self {
            Mode::Literal => Pruning::Indistinguishable,
            Mode::Quotient => Pruning::Descriptor,
        }
    }
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { jobs: 1, cache_capacity: 1 << 18, max_tau: Some(1_000_000), mode: Mode::Quotient }
    }
}

/// Counters from one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    /// Initial-track representatives evaluated.
    pub representatives: usize,
}

type LeftParts = Rc<Vec<(Vec<StateId>, Summary)>>;

/// A formula compiled against a structure, with its caches.
pub struct Checker<'k> {
    kripke: &'k Kripke,
    formula: CompiledFormula,
    nest: Vec<usize>,
    mode: Mode,
    pruning: Pruning,
    interner: Rc<RefCell<DescriptorInterner>>,
    memo: LruCache<(NodeId, u32), bool>,
    /// ⟨A⟩/[A] results by last state, ⟨Ā⟩/[Ā] results by first state.
    by_endpoint: HashMap<(NodeId, StateId), bool>,
    labels: HashMap<DescriptorElement, PropSet>,
    /// Transitions of the descriptor automaton: (level, id, state) to the
    /// summary of the extended track.
    steps: HashMap<(usize, u32, StateId), Summary>,
    /// One track per descriptor among the tracks ending in a state, with
    /// the summary of the whole track, by (state, level).
    left_parts: HashMap<(StateId, usize), LeftParts>,
    stats: Stats,
}

/// Where a left extension comes from: a single state or a stored track.
#[derive(Clone, Copy)]
enum Left {
    State(StateId),
    Part(StateId, usize),
}

fn compile(kripke: &Kripke, formula: &Formula) -> Result<(CompiledFormula, Vec<usize>), CheckError> {
    let expanded = try_expand(formula, EXPANSION_LIMIT)?;
    let compiled = CompiledFormula::new(&expanded, kripke);
    let nest =
        (0..compiled.len()).map(|n| compiled.nest_b(n).ok_or(CheckError::ContainsE)).collect::<Result<Vec<_>, _>>()?;
    Ok((compiled, nest))
}

impl<'k> Checker<'k> {
    pub fn new(kripke: &'k Kripke, formula: &Formula, options: &CheckOptions) -> Result<Self, CheckError> {
        let (formula, nest) = compile(kripke, formula)?;
        if let Some(ceiling) = options.max_tau {
            let budget = nest[formula.root()];
            let t = tau(kripke.num_states() as u64, budget as u64);
            if t > BigUint::from(ceiling) {
                return Err(CheckError::TauTooLarge { states: kripke.num_states(), budget, tau: t, ceiling });
            }
        }
        Ok(Checker {
            kripke,
            formula,
            nest,
            mode: options.mode,
            pruning: options.mode.pruning(),
            interner: Rc::new(RefCell::new(DescriptorInterner::new())),
            memo: LruCache::new(NonZeroUsize::new(options.cache_capacity.max(1)).expect("positive")),
            by_endpoint: HashMap::new(),
            labels: HashMap::new(),
            steps: HashMap::new(),
            left_parts: HashMap::new(),
            stats: Stats::default(),
        })
    }

    /// B-nesting depth of the whole formula.
    pub fn budget(&self) -> usize {
        self.nest[self.formula.root()]
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// Truth of the formula on one track.
    pub fn check_track(&mut self, track: &[StateId]) -> bool {
        let chain = summarize(&mut self.interner.borrow_mut(), self.budget(), track);
        self.eval(self.formula.root(), track, &chain)
    }

    /// Evaluates the formula on every representative of the initial tracks.
    pub fn mod_check(&mut self) -> Verdict {
        self.mod_check_strided(0, 1, &AtomicUsize::new(usize::MAX))
    }

    /// Evaluates representatives `i` with `i % stride == offset`, stopping
    /// once a failure at a smaller index is known.
    fn mod_check_strided(&mut self, offset: usize, stride: usize, best: &AtomicUsize) -> Verdict {
        let root = self.formula.root();
        let mut walk = SummaryUnravel::forward(
            self.kripke,
            self.interner.clone(),
            self.kripke.initial(),
            self.budget(),
            self.pruning,
        );
        let mut index = 0;
        while let Some((t, c)) = walk.next_track() {
            if index >= best.load(Ordering::Relaxed) {
                break;
            }
            if index % stride == offset {
                self.stats.representatives += 1;
                if !self.eval(root, t, c) {
                    best.fetch_min(index, Ordering::Relaxed);
                    return Verdict { holds: false, counterexample: Some(Track::from_vec_unchecked(t.to_vec())) };
                }
            }
            index += 1;
        }
        Verdict { holds: true, counterexample: None }
    }

    fn label(&mut self, d: DescriptorElement) -> PropSet {
        let k = self.kripke;
        *self.labels.entry(d).or_insert_with(|| {
            d.internal
                .iter()
                .fold(k.label(d.initial).intersection(k.label(d.last)), |acc, s| acc.intersection(k.label(s)))
        })
    }

    fn eval(&mut self, n: NodeId, st: &[StateId], ch: &[Summary]) -> bool {
        debug_assert_eq!(st.len(), ch.len() + 1);
        let last = ch.last().expect("tracks have length at least 2");
        if self.formula.is_propositional(n) {
            let label = self.label(last.element());
            return self.formula.eval_prop(n, label);
        }
        let (m, a, diamond) = match self.formula.node(n) {
            Node::Not(a) => return !self.eval(a, st, ch),
            Node::And(a, b) => return self.eval(a, st, ch) && self.eval(b, st, ch),
            Node::Or(a, b) => return self.eval(a, st, ch) || self.eval(b, st, ch),
            Node::Diamond(m, a) => (m, a, true),
            Node::Boxed(m, a) => (m, a, false),
            Node::Top | Node::Bottom | Node::Prop(_) => unreachable!("propositional"),
        };
        let endpoint = match m {
            Modality::A => Some(st[st.len() - 1]),
            Modality::Abar => Some(st[0]),
            _ => None,
        };
        if let Some(v) = endpoint.and_then(|e| self.by_endpoint.get(&(n, e))) {
            return *v;
        }
        let key = (n, last.id(self.nest[n]));
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        if m == Modality::Bbar && self.mode == Mode::Quotient {
            return self.extension_region(n, a, diamond, st, ch);
        }
        // A diamond holds iff some witness satisfies `a`; a box fails iff
        // some witness falsifies it.
        let found = if m == Modality::Ebar && self.mode == Mode::Quotient {
            self.left_extensions(a, diamond, st)
        } else {
            self.witness(m, a, diamond, st, ch)
        };
        let v = found == diamond;
        if let Some(e) = endpoint {
            self.by_endpoint.insert((n, e), v);
        }
        self.memo.put(key, v);
        v
    }

    /// Settles ⟨B̄⟩a / [B̄]a at `st` and at every descriptor reachable from
    /// it by right extension.
    fn extension_region(&mut self, n: NodeId, a: NodeId, diamond: bool, st: &[StateId], ch: &[Summary]) -> bool {
        let j = self.nest[a];
        let k = self.kripke;
        let mut index: HashMap<u32, usize> = HashMap::new();
        let mut ids = vec![ch.last().expect("nonempty").id(j)];
        let mut hit = vec![self.eval(a, st, ch) == diamond];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new()];
        index.insert(ids[0], 0);
        let mut track = st.to_vec();
        let mut chain = ch.to_vec();
        // (node, next successor)
        let mut stack = vec![(0usize, 0usize)];
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let succ = k.successors(track[track.len() - 1]);
            if *next >= succ.len() {
                stack.pop();
                if !stack.is_empty() {
                    track.pop();
                    chain.pop();
                }
                continue;
            }
            let u = succ[*next];
            *next += 1;
            let s = chain.last().expect("nonempty").extend(&mut self.interner.borrow_mut(), j, u);
            let id = s.id(j);
            if let Some(&known) = index.get(&id) {
                preds[known].push(node);
                continue;
            }
            let fresh = ids.len();
            index.insert(id, fresh);
            ids.push(id);
            preds.push(vec![node]);
            track.push(u);
            chain.push(s);
            hit.push(self.eval(a, &track, &chain) == diamond);
            stack.push((fresh, 0));
        }
        // Nodes with a path of length at least one to a hit.
        let mut reach = vec![false; ids.len()];
        let mut work: Vec<usize> = (0..ids.len()).filter(|&i| hit[i]).collect();
        while let Some(i) = work.pop() {
            for &p in &preds[i] {
                if !reach[p] {
                    reach[p] = true;
                    work.push(p);
                }
            }
        }
        for (i, &id) in ids.iter().enumerate() {
            self.memo.put((n, id), reach[i] == diamond);
        }
        reach[0] == diamond
    }

    /// Summary of the track of `s` extended by `u`, at level `j`.
    fn step(&mut self, s: &Summary, j: usize, u: StateId) -> Summary {
        let key = (j, s.id(j), u);
        if let Some(t) = self.steps.get(&key) {
            return t.clone();
        }
        let t = s.extend(&mut self.interner.borrow_mut(), j, u);
        self.steps.insert(key, t.clone());
        t
    }

    fn chain_of(&mut self, track: &[StateId], j: usize) -> Vec<Summary> {
        let mut chain = Vec::with_capacity(track.len() - 1);
        chain.push(Summary::start(&mut self.interner.borrow_mut(), j, track[0], track[1]));
        for &u in &track[2..] {
            let next = self.step(chain.last().expect("nonempty"), j, u);
            chain.push(next);
        }
        chain
    }

    fn left_parts(&mut self, v: StateId, j: usize) -> LeftParts {
        if let Some(p) = self.left_parts.get(&(v, j)) {
            return p.clone();
        }
        let mut walk = SummaryUnravel::backward(self.kripke, self.interner.clone(), v, j, Pruning::Descriptor);
        let mut parts = Vec::new();
        while let Some((t, c)) = walk.next_track() {
            parts.push((t.to_vec(), c.last().expect("nonempty").clone()));
        }
        let parts = Rc::new(parts);
        self.left_parts.insert((v, j), parts.clone());
        parts
    }

    /// Whether some `σ·st` gives `a` the value `target`, with `σ` a state or
    /// a track. The descriptors of all candidates are carried along `st`
    /// together, merging candidates that reach the same descriptor.
    fn left_extensions(&mut self, a: NodeId, target: bool, st: &[StateId]) -> bool {
        let j = self.nest[a];
        let first = st[0];
        let mut frontier: Vec<(Summary, Left)> = Vec::new();
        let mut seen = HashSet::new();
        for &v in self.kripke.predecessors(first) {
            let s = Summary::start(&mut self.interner.borrow_mut(), j, v, first);
            if seen.insert(s.id(j)) {
                frontier.push((s, Left::State(v)));
            }
            let parts = self.left_parts(v, j);
            for (i, (_, last)) in parts.iter().enumerate() {
                let s = self.step(last, j, first);
                if seen.insert(s.id(j)) {
                    frontier.push((s, Left::Part(v, i)));
                }
            }
        }
        for &u in &st[1..] {
            seen.clear();
            let mut next = Vec::with_capacity(frontier.len());
            for (s, origin) in &frontier {
                let t = self.step(s, j, u);
                if seen.insert(t.id(j)) {
                    next.push((t, *origin));
                }
            }
            frontier = next;
        }
        for (s, origin) in frontier {
            if self.formula.is_propositional(a) {
                let label = self.label(s.element());
                if self.formula.eval_prop(a, label) == target {
                    return true;
                }
                continue;
            }
            let mut track = match origin {
                Left::State(v) => vec![v],
                Left::Part(v, i) => self.left_parts[&(v, j)][i].0.clone(),
            };
            track.extend_from_slice(st);
            let chain = self.chain_of(&track, j);
            if self.eval(a, &track, &chain) == target {
                return true;
            }
        }
        false
    }

    /// Whether some track related to `st` by `m` gives `a` the value
    /// `target`.
    fn witness(&mut self, m: Modality, a: NodeId, target: bool, st: &[StateId], ch: &[Summary]) -> bool {
        let j = self.nest[a];
        let k = self.kripke;
        match m {
            Modality::A | Modality::Abar => {
                let mut walk = if m == Modality::A {
                    SummaryUnravel::forward(k, self.interner.clone(), st[st.len() - 1], j, self.pruning)
                } else {
                    SummaryUnravel::backward(k, self.interner.clone(), st[0], j, self.pruning)
                };
                while let Some((t, c)) = walk.next_track() {
                    if self.eval(a, t, c) == target {
                        return true;
                    }
                }
                false
            }
            Modality::B => (2..st.len()).any(|len| self.eval(a, &st[..len], &ch[..len - 1]) == target),
            Modality::Bbar => {
                let last = ch.last().expect("nonempty");
                for &v in k.successors(st[st.len() - 1]) {
                    let mut track = st.to_vec();
                    track.push(v);
                    let mut chain = ch.to_vec();
                    chain.push(last.extend(&mut self.interner.borrow_mut(), j, v));
                    if self.eval(a, &track, &chain) == target {
                        return true;
                    }
                    let mut walk = SummaryUnravel::forward(k, self.interner.clone(), v, j, self.pruning);
                    while let Some((t, _)) = walk.next_track() {
                        track.truncate(st.len() + 1);
                        chain.truncate(ch.len() + 1);
                        {
                            let mut interner = self.interner.borrow_mut();
                            for &u in &t[1..] {
                                let next = chain.last().expect("nonempty").extend(&mut interner, j, u);
                                chain.push(next);
                                track.push(u);
                            }
                        }
                        if self.eval(a, &track, &chain) == target {
                            return true;
                        }
                    }
                }
                false
            }
            Modality::Ebar => {
                for &v in k.predecessors(st[0]) {
                    let mut track = Vec::with_capacity(st.len() + 1);
                    track.push(v);
                    track.extend_from_slice(st);
                    let chain = summarize(&mut self.interner.borrow_mut(), j, &track);
                    if self.eval(a, &track, &chain) == target {
                        return true;
                    }
                    let mut walk = SummaryUnravel::backward(k, self.interner.clone(), v, j, self.pruning);
                    while let Some((t, c)) = walk.next_track() {
                        let mut track = t.to_vec();
                        let mut chain = c.to_vec();
                        {
                            let mut interner = self.interner.borrow_mut();
                            for &u in st {
                                let next = chain.last().expect("nonempty").extend(&mut interner, j, u);
                                chain.push(next);
                                track.push(u);
                            }
                        }
                        if self.eval(a, &track, &chain) == target {
                            return true;
                        }
                    }
                }
                false
            }
            Modality::E => unreachable!("rejected at construction"),
            _ => unreachable!("derived modalities are desugared"),
        }
    }
}

/// Decides `K ⊨ ψ` with default options.
pub fn mod_check(kripke: &Kripke, formula: &Formula) -> Result<Verdict, CheckError> {
    mod_check_with(kripke, formula, &CheckOptions::default())
}

/// Decides `K ⊨ ψ`. With several jobs the representatives are dealt out
/// round-robin; the reported counterexample is the first failing
/// representative in walk order either way.
pub fn mod_check_with(kripke: &Kripke, formula: &Formula, options: &CheckOptions) -> Result<Verdict, CheckError> {
    if options.jobs <= 1 {
        return Ok(Checker::new(kripke, formula, options)?.mod_check());
    }
    // Validate once before spawning.
    drop(Checker::new(kripke, formula, options)?);
    let best = AtomicUsize::new(usize::MAX);
    let jobs = options.jobs;
    let results: Vec<(Verdict, usize)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|offset| {
                let best = &best;
                scope.spawn(move || {
                    let mut checker = Checker::new(kripke, formula, options).expect("validated above");
                    let v = checker.mod_check_strided(offset, jobs, best);
                    (v, offset)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let winner = best.load(Ordering::Relaxed);
    if winner == usize::MAX {
        return Ok(Verdict { holds: true, counterexample: None });
    }
    let verdict = results
        .into_iter()
        .find(|(v, offset)| !v.holds && winner % jobs == *offset)
        .map(|(v, _)| v)
        .expect("the failing worker reports its track");
    Ok(verdict)
}

/// Truth of `formula` on `track`; `budget` must be at least the formula's
/// B-nesting depth.
pub fn check(kripke: &Kripke, budget: usize, formula: &Formula, track: &Track) -> Result<bool, CheckError> {
    let options = CheckOptions { max_tau: None, ..CheckOptions::default() };
    let mut checker = Checker::new(kripke, formula, &options)?;
    assert!(checker.budget() <= budget, "budget {budget} below the B-nesting depth {}", checker.budget());
    Ok(checker.check_track(track.states()))
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
    fn evaluates_on_tracks() {
        let k = k2();
        let t = k.parse_track("v0 v1 v0 v1").unwrap();
        assert!(check(&k, 0, &parse("<A>q").unwrap(), &t).unwrap());
        let t = k.parse_track("v0 v1 v0").unwrap();
        assert!(!check(&k, 0, &parse("<A>q").unwrap(), &t).unwrap());
    }

    #[test]
    fn rejects_e() {
        let k = k2();
        assert!(matches!(mod_check(&k, &parse("<E>p").unwrap()), Err(CheckError::ContainsE)));
    }

    #[test]
    fn counterexample_is_the_first_failure_for_any_job_count() {
        let k = k2();
        let f = parse("[B]p | <Bi><B><A>q").unwrap();
        let one = mod_check(&k, &f).unwrap();
        for jobs in 2..=3 {
            let many = mod_check_with(&k, &f, &CheckOptions { jobs, ..CheckOptions::default() }).unwrap();
            assert_eq!(one, many);
        }
    }
}
