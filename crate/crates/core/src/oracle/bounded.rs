//! Literal evaluation of the interval semantics with every quantification
//! over tracks cut at a length bound.

use std::collections::HashMap;

use num_bigint::BigUint;
use thiserror::Error;

use crate::formula::{nest_b, try_expand, CompiledFormula, Formula, FormulaError, Modality, Node, NodeId};
use crate::kripke::{Kripke, StateId, Track};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("depth bound must be at least 2")]
    DepthTooSmall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Longest track considered for witnesses and initial tracks. For
    /// ⟨B̄⟩ and ⟨Ē⟩ it bounds the added part: `ρ·σ` is considered when
    /// `lst(ρ)·σ` is a track of at most this length.
    pub depth_bound: usize,
}

/// Result of a structure-level check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub holds: bool,
    pub counterexample: Option<Track>,
}

/// Largest expanded formula accepted, in nodes.
pub const EXPANSION_LIMIT: usize = 1 << 20;

/// `min(1 + (1+w)^(2k+4) + w, 1 + (k+3)^(w^2+1) + w)`: every B_k-descriptor
/// of a track over `w` states is the descriptor of a track at most this long.
pub fn length_bound(w: usize, k: usize) -> BigUint {
    let w_big = BigUint::from(w);
    let one = BigUint::from(1u32);
    let a = &one + BigUint::from(1 + w).pow((2 * k + 4) as u32) + &w_big;
    let b = &one + BigUint::from(k + 3).pow((w * w + 1) as u32) + &w_big;
    a.min(b)
}

/// Whether the bound is large enough for the evaluation to be exact: the
/// formula has no E and `depth_bound >= tau(|W|, nest_b)`.
pub fn bound_is_exact(kripke: &Kripke, formula: &Formula, cfg: &OracleConfig) -> bool {
    match nest_b(formula) {
        Ok(k) => BigUint::from(cfg.depth_bound) >= length_bound(kripke.num_states(), k),
        Err(_) => false,
    }
}

/// Depth-first walk over tracks from (or into) a state, shortest first
/// along each branch.
struct Paths {
    forward: bool,
    max_len: usize,
    path: Vec<StateId>,
    next: Vec<usize>,
}

impl Paths {
    fn new(anchor: StateId, forward: bool, max_len: usize) -> Self {
        Paths { forward, max_len, path: vec![anchor], next: vec![0] }
    }

    /// Next track, in track order (the anchor first when forward, last
    /// when backward).
    fn next(&mut self, k: &Kripke) -> Option<Vec<StateId>> {
        loop {
            let top = *self.path.last()?;
            let i = *self.next.last().expect("parallel stacks");
            let around = if self.forward { k.successors(top) } else { k.predecessors(top) };
            if i >= around.len() || self.path.len() >= self.max_len {
                self.path.pop();
                self.next.pop();
                continue;
            }
            *self.next.last_mut().expect("parallel stacks") += 1;
            self.path.push(around[i]);
            self.next.push(0);
            let mut t = self.path.clone();
            if !self.forward {
                t.reverse();
            }
            return Some(t);
        }
    }
}

struct Bounded<'k> {
    k: &'k Kripke,
    f: CompiledFormula,
    depth: usize,
    memo: HashMap<(NodeId, Vec<StateId>), bool>,
    by_endpoint: HashMap<(NodeId, StateId), bool>,
}

impl<'k> Bounded<'k> {
    fn new(k: &'k Kripke, formula: &Formula, cfg: &OracleConfig) -> Result<Self, OracleError> {
        if cfg.depth_bound < 2 {
            return Err(OracleError::DepthTooSmall);
        }
        let expanded = try_expand(formula, EXPANSION_LIMIT)?;
        Ok(Bounded {
            k,
            f: CompiledFormula::new(&expanded, k),
            depth: cfg.depth_bound,
            memo: HashMap::new(),
            by_endpoint: HashMap::new(),
        })
    }

    fn eval(&mut self, n: NodeId, t: &[StateId]) -> bool {
        if self.f.is_propositional(n) {
            return self.f.eval_prop(n, self.k.track_label(t));
        }
        let (m, a, diamond) = match self.f.node(n) {
            Node::Not(a) => return !self.eval(a, t),
            Node::And(a, b) => return self.eval(a, t) && self.eval(b, t),
            Node::Or(a, b) => return self.eval(a, t) || self.eval(b, t),
            Node::Diamond(m, a) => (m, a, true),
            Node::Boxed(m, a) => (m, a, false),
            _ => unreachable!("propositional"),
        };
        let endpoint = match m {
            Modality::A => Some(t[t.len() - 1]),
            Modality::Abar => Some(t[0]),
            _ => None,
        };
        if let Some(&v) = endpoint.and_then(|e| self.by_endpoint.get(&(n, e))) {
            return v;
        }
        if endpoint.is_none() {
            if let Some(&v) = self.memo.get(&(n, t.to_vec())) {
                return v;
            }
        }
        let found = self.exists(m, a, diamond, t);
        let v = found == diamond;
        match endpoint {
            Some(e) => {
                self.by_endpoint.insert((n, e), v);
            }
            None => {
                self.memo.insert((n, t.to_vec()), v);
            }
        }
        v
    }

    fn exists(&mut self, m: Modality, a: NodeId, target: bool, t: &[StateId]) -> bool {
        let k = self.k;
        let len = t.len();
        match m {
            Modality::A | Modality::Abar => {
                let forward = m == Modality::A;
                let anchor = if forward { t[len - 1] } else { t[0] };
                let mut walk = Paths::new(anchor, forward, self.depth);
                while let Some(s) = walk.next(k) {
                    if self.eval(a, &s) == target {
                        return true;
                    }
                }
                false
            }
            Modality::B => (2..len).any(|l| self.eval(a, &t[..l]) == target),
            Modality::E => (1..len - 1).any(|i| self.eval(a, &t[i..]) == target),
            Modality::Bbar => {
                let mut walk = Paths::new(t[len - 1], true, self.depth);
                while let Some(s) = walk.next(k) {
                    let mut ext = t.to_vec();
                    ext.extend_from_slice(&s[1..]);
                    if self.eval(a, &ext) == target {
                        return true;
                    }
                }
                false
            }
            Modality::Ebar => {
                let mut walk = Paths::new(t[0], false, self.depth);
                while let Some(s) = walk.next(k) {
                    let mut ext = s[..s.len() - 1].to_vec();
                    ext.extend_from_slice(t);
                    if self.eval(a, &ext) == target {
                        return true;
                    }
                }
                false
            }
            _ => unreachable!("derived modalities are desugared"),
        }
    }
}

/// Truth of `formula` on `track` with bounded quantification.
pub fn oracle_eval(
    kripke: &Kripke,
    track: &[StateId],
    formula: &Formula,
    cfg: &OracleConfig,
) -> Result<bool, OracleError> {
    let mut b = Bounded::new(kripke, formula, cfg)?;
    let root = b.f.root();
    Ok(b.eval(root, track))
}

/// Checks `formula` on every initial track of length at most the bound, in
/// depth-first order; the first failing track is the counterexample.
pub fn oracle_mod_check(kripke: &Kripke, formula: &Formula, cfg: &OracleConfig) -> Result<OracleVerdict, OracleError> {
    let mut b = Bounded::new(kripke, formula, cfg)?;
    let root = b.f.root();
    let mut walk = Paths::new(kripke.initial(), true, cfg.depth_bound);
    while let Some(t) = walk.next(kripke) {
        if !b.eval(root, &t) {
            return Ok(OracleVerdict { holds: false, counterexample: Some(Track::from_vec_unchecked(t)) });
        }
    }
    Ok(OracleVerdict { holds: true, counterexample: None })
}
