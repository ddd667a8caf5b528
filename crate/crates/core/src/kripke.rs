//! Finite Kripke structures, tracks, and the plain-text model format.
//!
//! ```text
//! # comment
//! states: v0 v1
//! init: v0
//! props: p q            # optional; defaults to the labels' union
//! label v0: p
//! label v1: q
//! edges: v0->v0 v0->v1 v1->v0 v1->v1
//! ```
//!
//! States are ordered by declaration. That order drives every enumeration.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::bitset::{BitSet, MAX_BITS};

/// Index into the state table of a [`Kripke`] structure.
pub type StateId = usize;
/// Set of states.
pub type StateSet = BitSet;
/// Set of proposition indices.
pub type PropSet = BitSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KripkeError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("delta not left-total: state `{0}` has no successor")]
    NotLeftTotal(String),
    #[error("no states declared")]
    NoStates,
    #[error("too many {what}: {count} (limit {MAX_BITS})")]
    TooLarge { what: &'static str, count: usize },
    #[error("invalid track: {0}")]
    InvalidTrack(String),
}

/// A finite Kripke structure with a left-total transition relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kripke {
    state_names: Vec<String>,
    prop_names: Vec<String>,
    labels: Vec<PropSet>,
    succ: Vec<Vec<StateId>>,
    pred: Vec<Vec<StateId>>,
    succ_set: Vec<StateSet>,
    initial: StateId,
}

impl Kripke {
    /// Builds a structure from names. `labels[i]` lists the propositions of
    /// state `i`; `props`, when given, fixes the proposition order.
    pub fn from_parts(
        states: &[&str],
        props: Option<&[&str]>,
        labels: &[(&str, &[&str])],
        edges: &[(&str, &str)],
        initial: &str,
    ) -> Result<Self, KripkeError> {
        let mut b = Builder::default();
        for s in states {
            b.add_state(s)?;
        }
        if let Some(ps) = props {
            for p in ps {
                b.declare_prop(p);
            }
            b.props_declared = true;
        }
        for (s, ps) in labels {
            for p in *ps {
                b.add_label(s, p)?;
            }
        }
        for (a, c) in edges {
            b.add_edge(a, c)?;
        }
        b.initial = Some(initial.to_string());
        b.finish()
    }

    /// Parses the text model format.
    pub fn parse(text: &str) -> Result<Self, KripkeError> {
        let mut b = Builder::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| KripkeError::Parse { line, message };
            let (head, rest) =
                content.split_once(':').ok_or_else(|| err(format!("expected `key: value`, found `{content}`")))?;
            let head = head.trim();
            let words = rest.split_whitespace();
            let at_line = |e: KripkeError| match e {
                KripkeError::Parse { .. } => e,
                other => err(other.to_string()),
            };
            match head {
                "states" => {
                    for w in words {
                        check_name(w).map_err(err)?;
                        b.add_state(w).map_err(at_line)?;
                    }
                }
                "init" => {
                    let ws: Vec<&str> = words.collect();
                    if ws.len() != 1 {
                        return Err(err("`init` takes exactly one state".into()));
                    }
                    if b.initial.is_some() {
                        return Err(err("`init` given twice".into()));
                    }
                    b.initial = Some(ws[0].to_string());
                }
                "props" => {
                    for w in words {
                        check_name(w).map_err(err)?;
                        b.declare_prop(w);
                    }
                    b.props_declared = true;
                }
                "edges" => {
                    for w in words {
                        let (a, c) = w.split_once("->").ok_or_else(|| err(format!("malformed edge `{w}`")))?;
                        b.add_edge(a, c).map_err(at_line)?;
                    }
                }
                h if h.starts_with("label") => {
                    let state = h["label".len()..].trim();
                    if state.is_empty() || !h["label".len()..].starts_with(char::is_whitespace) {
                        return Err(err(format!("malformed label line `{content}`")));
                    }
                    b.state_index(state).map_err(at_line)?;
                    b.labelled.push(state.to_string());
                    for w in words {
                        check_name(w).map_err(err)?;
                        b.add_label(state, w).map_err(at_line)?;
                    }
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        b.finish()
    }

    /// Renders the structure in the text model format.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states: {}", self.state_names.join(" "));
        let _ = writeln!(out, "init: {}", self.state_names[self.initial]);
        let _ = writeln!(out, "props: {}", self.prop_names.join(" "));
        for (s, name) in self.state_names.iter().enumerate() {
            let ps: Vec<&str> = self.labels[s].iter().map(|p| self.prop_names[p].as_str()).collect();
            let _ = writeln!(out, "label {name}: {}", ps.join(" "));
        }
        let edges: Vec<String> = (0..self.num_states())
            .flat_map(|a| {
                self.succ[a].iter().map(move |&c| format!("{}->{}", self.state_names[a], self.state_names[c]))
            })
            .collect();
        let _ = writeln!(out, "edges: {}", edges.join(" "));
        out
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_props(&self) -> usize {
        self.prop_names.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn prop_names(&self) -> &[String] {
        &self.prop_names
    }

    pub fn prop_id(&self, name: &str) -> Option<usize> {
        self.prop_names.iter().position(|n| n == name)
    }

    pub fn label(&self, s: StateId) -> PropSet {
        self.labels[s]
    }

    /// Successors in declaration order.
    pub fn successors(&self, s: StateId) -> &[StateId] {
        &self.succ[s]
    }

    /// Predecessors in declaration order.
    pub fn predecessors(&self, s: StateId) -> &[StateId] {
        &self.pred[s]
    }

    pub fn has_edge(&self, a: StateId, b: StateId) -> bool {
        self.succ_set[a].contains(b)
    }

    pub fn all_states(&self) -> StateSet {
        BitSet::full(self.num_states())
    }

    /// Whether `states` is a track: at least two states joined by edges.
    pub fn is_track(&self, states: &[StateId]) -> bool {
        states.len() >= 2
            && states.iter().all(|&s| s < self.num_states())
            && states.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }

    /// Parses a whitespace-separated list of state names into a track.
    pub fn parse_track(&self, text: &str) -> Result<Track, KripkeError> {
        let states = text
            .split_whitespace()
            .map(|w| self.state_id(w).ok_or_else(|| KripkeError::UnknownState(w.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Track::new(self, states)
    }

    /// Space-separated state names.
    pub fn format_states(&self, states: &[StateId]) -> String {
        let names: Vec<&str> = states.iter().map(|&s| self.state_name(s)).collect();
        names.join(" ")
    }

    pub fn format_state_set(&self, set: StateSet) -> String {
        let names: Vec<&str> = set.iter().map(|s| self.state_name(s)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Intersection of the labels of all states in the track.
    pub fn track_label(&self, states: &[StateId]) -> PropSet {
        states.iter().fold(BitSet::full(self.num_props()), |acc, &s| acc.intersection(self.labels[s]))
    }

    /// The structure with every edge reversed.
    pub fn transposed(&self) -> Kripke {
        let mut t = self.clone();
        std::mem::swap(&mut t.succ, &mut t.pred);
        t.succ_set = t.succ.iter().map(|v| v.iter().copied().collect()).collect();
        t
    }
}

/// A finite path of length at least two through a structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Track(Vec<StateId>);

impl Track {
    pub fn new(k: &Kripke, states: Vec<StateId>) -> Result<Self, KripkeError> {
        if states.len() < 2 {
            return Err(KripkeError::InvalidTrack(format!("length {} is below 2", states.len())));
        }
        if let Some(&s) = states.iter().find(|&&s| s >= k.num_states()) {
            return Err(KripkeError::InvalidTrack(format!("state index {s} out of range")));
        }
        if let Some(w) = states.windows(2).find(|w| !k.has_edge(w[0], w[1])) {
            return Err(KripkeError::InvalidTrack(format!("no edge {} -> {}", k.state_name(w[0]), k.state_name(w[1]))));
        }
        Ok(Track(states))
    }

    /// Wraps a state sequence the caller knows to be a track.
    pub fn from_vec_unchecked(states: Vec<StateId>) -> Self {
        debug_assert!(states.len() >= 2);
        Track(states)
    }

    pub fn states(&self) -> &[StateId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<StateId> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn fst(&self) -> StateId {
        self.0[0]
    }

    pub fn lst(&self) -> StateId {
        self.0[self.0.len() - 1]
    }

    /// States strictly between the endpoints.
    pub fn intstates(&self) -> StateSet {
        intstates(&self.0)
    }

    /// Proper prefixes of length at least two, shortest first.
    pub fn prefixes(&self) -> impl Iterator<Item = &[StateId]> {
        (2..self.0.len()).map(move |n| &self.0[..n])
    }

    /// Proper suffixes of length at least two, longest first.
    pub fn suffixes(&self) -> impl Iterator<Item = &[StateId]> {
        (1..self.0.len() - 1).map(move |i| &self.0[i..])
    }
}

/// States strictly between the endpoints of a state sequence.
pub fn intstates(states: &[StateId]) -> StateSet {
    if states.len() <= 2 {
        return BitSet::EMPTY;
    }
    states[1..states.len() - 1].iter().copied().collect()
}

fn check_name(w: &str) -> Result<(), String> {
    let mut chars = w.chars();
    let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(format!("invalid name `{w}`"))
    }
}

#[derive(Default)]
struct Builder {
    states: Vec<String>,
    index: HashMap<String, StateId>,
    props: Vec<String>,
    props_declared: bool,
    labels: Vec<Vec<String>>,
    labelled: Vec<String>,
    edges: Vec<(StateId, StateId)>,
    initial: Option<String>,
}

impl Builder {
    fn add_state(&mut self, name: &str) -> Result<(), KripkeError> {
        if self.index.contains_key(name) {
            return Err(KripkeError::DuplicateState(name.to_string()));
        }
        self.index.insert(name.to_string(), self.states.len());
        self.states.push(name.to_string());
        self.labels.push(Vec::new());
        Ok(())
    }

    fn state_index(&self, name: &str) -> Result<StateId, KripkeError> {
        self.index.get(name).copied().ok_or_else(|| KripkeError::UnknownState(name.to_string()))
    }

    fn declare_prop(&mut self, p: &str) {
        if !self.props.iter().any(|q| q == p) {
            self.props.push(p.to_string());
        }
    }

    fn add_label(&mut self, state: &str, p: &str) -> Result<(), KripkeError> {
        let s = self.state_index(state)?;
        self.labels[s].push(p.to_string());
        Ok(())
    }

    fn add_edge(&mut self, a: &str, c: &str) -> Result<(), KripkeError> {
        let a = self.state_index(a.trim())?;
        let c = self.state_index(c.trim())?;
        self.edges.push((a, c));
        Ok(())
    }

    fn finish(mut self) -> Result<Kripke, KripkeError> {
        let n = self.states.len();
        if n == 0 {
            return Err(KripkeError::NoStates);
        }
        if n > MAX_BITS {
            return Err(KripkeError::TooLarge { what: "states", count: n });
        }
        let init_name = self.initial.clone().ok_or(KripkeError::Parse { line: 0, message: "missing `init`".into() })?;
        let initial = self.state_index(&init_name)?;
        if !self.props_declared {
            let used: Vec<String> = self.labels.iter().flatten().cloned().collect();
            for p in used {
                self.declare_prop(&p);
            }
        }
        if self.props.len() > MAX_BITS {
            return Err(KripkeError::TooLarge { what: "propositions", count: self.props.len() });
        }
        let mut labels = vec![BitSet::EMPTY; n];
        for (s, ps) in self.labels.iter().enumerate() {
            for p in ps {
                let i =
                    self.props.iter().position(|q| q == p).ok_or_else(|| KripkeError::UnknownProposition(p.clone()))?;
                labels[s].insert(i);
            }
        }
        let mut succ_set = vec![BitSet::EMPTY; n];
        let mut pred_set = vec![BitSet::EMPTY; n];
        for &(a, c) in &self.edges {
            succ_set[a].insert(c);
            pred_set[c].insert(a);
        }
        if let Some(s) = (0..n).find(|&s| succ_set[s].is_empty()) {
            return Err(KripkeError::NotLeftTotal(self.states[s].clone()));
        }
        Ok(Kripke {
            succ: succ_set.iter().map(|s| s.iter().collect()).collect(),
            pred: pred_set.iter().map(|s| s.iter().collect()).collect(),
            succ_set,
            state_names: self.states,
            prop_names: self.props,
            labels,
            initial,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const K2: &str = "states: v0 v1\ninit: v0\nlabel v0: p\nlabel v1: q\nedges: v0->v0 v0->v1 v1->v0 v1->v1\n";

    #[test]
    fn parses_and_round_trips() {
        let k = Kripke::parse(K2).unwrap();
        assert_eq!(k.num_states(), 2);
        assert_eq!(k.prop_names(), ["p", "q"]);
        assert_eq!(k.successors(0), [0, 1]);
        let again = Kripke::parse(&k.serialize()).unwrap();
        assert_eq!(k, again);
    }

    #[test]
    fn rejects_missing_successor() {
        let err = Kripke::parse("states: a b\ninit: a\nedges: a->b\n").unwrap_err();
        assert_eq!(err, KripkeError::NotLeftTotal("b".into()));
        assert!(err.to_string().starts_with("delta not left-total"));
    }

    #[test]
    fn reports_line_numbers() {
        let err = Kripke::parse("states: a\n\ninit: a\nedges: a->z\n").unwrap_err();
        assert!(matches!(err, KripkeError::Parse { line: 4, .. }), "{err:?}");
        let err = Kripke::parse("states: a\ninit: a\nbogus: 1\n").unwrap_err();
        assert!(matches!(err, KripkeError::Parse { line: 3, .. }));
    }

    #[test]
    fn undeclared_proposition_is_rejected_when_props_are_fixed() {
        let err = Kripke::parse("states: a\ninit: a\nprops: p\nlabel a: q\nedges: a->a\n").unwrap_err();
        assert_eq!(err, KripkeError::UnknownProposition("q".into()));
    }

    #[test]
    fn track_functions() {
        let k = Kripke::parse(K2).unwrap();
        let t = k.parse_track("v0 v1 v0 v0").unwrap();
        assert_eq!(t.fst(), 0);
        assert_eq!(t.lst(), 0);
        assert_eq!(t.intstates().iter().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(t.prefixes().count(), 2);
        assert_eq!(t.suffixes().map(|s| s.len()).collect::<Vec<_>>(), vec![3, 2]);
        assert!(k.track_label(t.states()).is_empty());
        assert!(k.parse_track("v0").is_err());
    }

    #[test]
    fn transposed_reverses_edges() {
        let k = Kripke::parse("states: a b\ninit: a\nedges: a->b b->b\n").unwrap();
        let t = k.transposed();
        assert!(t.has_edge(1, 0));
        assert!(!t.has_edge(0, 1));
    }
}
