//! Expansion of sugar, desugaring of derived modalities, fragment
//! classification, B-nesting depth, and dualisation.

use std::collections::BTreeSet;

use super::{Exponent, Formula, FormulaError, Modality};

/// Fragments recognised by the engines, ordered from smallest to largest.
/// [`classify`] returns the first one that contains the formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fragment {
    Prop,
    AAbar,
    ForallAAbarBE,
    ExistsAAbarBE,
    AAbarBbarEbar,
    AAbarBBbarEbar,
    OutOfScope,
}

impl Fragment {
    pub fn name(self) -> &'static str {
        match self {
            Fragment::Prop => "Prop",
            Fragment::AAbar => "AAbar",
            Fragment::ForallAAbarBE => "forall-AAbarBE",
            Fragment::ExistsAAbarBE => "exists-AAbarBE",
            Fragment::AAbarBbarEbar => "AAbarBbarEbar",
            Fragment::AAbarBBbarEbar => "AAbarBBbarEbar",
            Fragment::OutOfScope => "out-of-scope",
        }
    }

    /// Whether the representative-track engine accepts formulas of this class.
    pub fn is_representative(self) -> bool {
        matches!(self, Fragment::Prop | Fragment::AAbar | Fragment::AAbarBbarEbar | Fragment::AAbarBBbarEbar)
    }
}

const DEFAULT_EXPANSION_LIMIT: usize = 1 << 24;

/// Unrolls `^n` powers and `AND` conjunctions.
///
/// Panics if the result would exceed 2^24 nodes; use [`try_expand`] to get
/// an error instead.
pub fn expand(f: &Formula) -> Formula {
    try_expand(f, DEFAULT_EXPANSION_LIMIT).expect("formula expansion too large")
}

/// Unrolls `^n` powers and `AND` conjunctions, failing once the result would
/// exceed `limit` nodes.
pub fn try_expand(f: &Formula, limit: usize) -> Result<Formula, FormulaError> {
    let mut env = Vec::new();
    let mut budget = limit;
    expand_in(f, &mut env, &mut budget, limit)
}

fn charge(budget: &mut usize, n: usize, limit: usize) -> Result<(), FormulaError> {
    *budget = budget.checked_sub(n).ok_or(FormulaError::TooLarge(limit))?;
    Ok(())
}

fn expand_in(
    f: &Formula,
    env: &mut Vec<(String, u32)>,
    budget: &mut usize,
    limit: usize,
) -> Result<Formula, FormulaError> {
    charge(budget, 1, limit)?;
    let rec =
        |g: &Formula, env: &mut Vec<(String, u32)>, budget: &mut usize| expand_in(g, env, budget, limit).map(Box::new);
    Ok(match f {
        Formula::Top | Formula::Bottom | Formula::Prop(_) => f.clone(),
        Formula::Not(a) => Formula::Not(rec(a, env, budget)?),
        Formula::And(a, b) => Formula::And(rec(a, env, budget)?, rec(b, env, budget)?),
        Formula::Or(a, b) => Formula::Or(rec(a, env, budget)?, rec(b, env, budget)?),
        Formula::Implies(a, b) => Formula::Implies(rec(a, env, budget)?, rec(b, env, budget)?),
        Formula::Iff(a, b) => Formula::Iff(rec(a, env, budget)?, rec(b, env, budget)?),
        Formula::Diamond(m, a) => Formula::Diamond(*m, rec(a, env, budget)?),
        Formula::Boxed(m, a) => Formula::Boxed(*m, rec(a, env, budget)?),
        Formula::Power { modality, boxed, exponent, body } => {
            let n = match exponent {
                Exponent::Lit(n) => *n,
                Exponent::Var(v) => env
                    .iter()
                    .rev()
                    .find(|(name, _)| name == v)
                    .map(|(_, val)| *val)
                    .ok_or_else(|| FormulaError::UnboundIndex(v.clone()))?,
            };
            charge(budget, n as usize, limit)?;
            let mut out = *rec(body, env, budget)?;
            for _ in 0..n {
                out = if *boxed { Formula::boxed(*modality, out) } else { Formula::diamond(*modality, out) };
            }
            out
        }
        Formula::BigAnd { var, lo, hi, body } => {
            if lo > hi {
                return Err(FormulaError::EmptyRange { lo: *lo, hi: *hi });
            }
            let mut parts = Vec::new();
            for i in *lo..=*hi {
                env.push((var.clone(), i));
                let part = rec(body, env, budget);
                env.pop();
                parts.push(*part?);
            }
            Formula::all(parts)
        }
    })
}

/// Rewrites derived modalities into `A`, `B`, `E` and their inverses, and
/// implications and equivalences into negation, conjunction and disjunction.
/// Sugar is expanded first.
pub fn desugar(f: &Formula) -> Formula {
    let f = expand(f);
    desugar_expanded(&f)
}

fn desugar_expanded(f: &Formula) -> Formula {
    use Modality::*;
    let pair = |m: Modality| match m {
        L => Some((A, A)),
        Lbar => Some((Abar, Abar)),
        D => Some((B, E)),
        Dbar => Some((Bbar, Ebar)),
        O => Some((E, Bbar)),
        Obar => Some((B, Ebar)),
        _ => None,
    };
    match f {
        Formula::Top | Formula::Bottom | Formula::Prop(_) => f.clone(),
        Formula::Not(a) => Formula::not(desugar_expanded(a)),
        Formula::And(a, b) => Formula::and(desugar_expanded(a), desugar_expanded(b)),
        Formula::Or(a, b) => Formula::or(desugar_expanded(a), desugar_expanded(b)),
        Formula::Implies(a, b) => Formula::or(Formula::not(desugar_expanded(a)), desugar_expanded(b)),
        Formula::Iff(a, b) => {
            let (a, b) = (desugar_expanded(a), desugar_expanded(b));
            Formula::and(Formula::or(Formula::not(a.clone()), b.clone()), Formula::or(Formula::not(b), a))
        }
        Formula::Diamond(m, a) => {
            let body = desugar_expanded(a);
            match pair(*m) {
                Some((x, y)) => Formula::diamond(x, Formula::diamond(y, body)),
                None => Formula::diamond(*m, body),
            }
        }
        Formula::Boxed(m, a) => {
            let body = desugar_expanded(a);
            match pair(*m) {
                Some((x, y)) => Formula::boxed(x, Formula::boxed(y, body)),
                None => Formula::boxed(*m, body),
            }
        }
        Formula::Power { .. } | Formula::BigAnd { .. } => desugar_expanded(&expand(f)),
    }
}

/// Modalities occurring in the formula, after desugaring.
pub fn modalities(f: &Formula) -> BTreeSet<Modality> {
    fn walk(f: &Formula, out: &mut BTreeSet<Modality>) {
        match f {
            Formula::Top | Formula::Bottom | Formula::Prop(_) => {}
            Formula::Not(a) => walk(a, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Formula::Diamond(m, a) | Formula::Boxed(m, a) => {
                out.insert(*m);
                walk(a, out);
            }
            Formula::Power { .. } | Formula::BigAnd { .. } => unreachable!("desugared"),
        }
    }
    let mut out = BTreeSet::new();
    walk(&desugar(f), &mut out);
    out
}

/// Maximum nesting of `B` modalities. Defined on the fragment without `E`.
pub fn nest_b(f: &Formula) -> Result<usize, FormulaError> {
    fn go(f: &Formula) -> Result<usize, FormulaError> {
        Ok(match f {
            Formula::Top | Formula::Bottom | Formula::Prop(_) => 0,
            Formula::Not(a) => go(a)?,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => go(a)?.max(go(b)?),
            Formula::Diamond(m, a) | Formula::Boxed(m, a) => match m {
                Modality::B => 1 + go(a)?,
                Modality::E => return Err(FormulaError::UnsupportedModality("E")),
                _ => go(a)?,
            },
            Formula::Power { .. } | Formula::BigAnd { .. } => unreachable!("desugared"),
        })
    }
    go(&desugar(f))
}

/// Whether the formula, read up to De Morgan and double negation, is built
/// from propositional formulas by conjunction and `[A]`, `[Ai]`, `[B]`, `[E]`.
pub fn is_forall_fragment(f: &Formula) -> bool {
    universal(&desugar(f), false)
}

/// Whether the formula, read up to De Morgan and double negation, is built
/// from propositional formulas by disjunction and `<A>`, `<Ai>`, `<B>`, `<E>`.
pub fn is_exists_fragment(f: &Formula) -> bool {
    universal(&desugar(f), true)
}

fn forall_modality(m: Modality) -> bool {
    matches!(m, Modality::A | Modality::Abar | Modality::B | Modality::E)
}

/// Whether `f` (negated when `neg`) fits the universal grammar.
fn universal(f: &Formula, neg: bool) -> bool {
    if f.is_propositional() {
        return true;
    }
    match f {
        Formula::Not(a) => universal(a, !neg),
        Formula::And(a, b) if !neg => universal(a, false) && universal(b, false),
        Formula::Or(a, b) if neg => universal(a, true) && universal(b, true),
        Formula::Boxed(m, a) if !neg && forall_modality(*m) => universal(a, false),
        Formula::Diamond(m, a) if neg && forall_modality(*m) => universal(a, true),
        _ => false,
    }
}

/// The negation of a universal formula, pushed down to the propositional
/// leaves so that it fits the existential grammar.
pub fn to_exists_dual(f: &Formula) -> Result<Formula, FormulaError> {
    let f = desugar(f);
    if !universal(&f, false) {
        return Err(FormulaError::NotInFragment("forall-AAbarBE"));
    }
    Ok(existential_form(&f, true))
}

/// Rewrites `f` (negated when `neg`) into the existential grammar.
/// Requires `universal(f, !neg)`.
pub(crate) fn existential_form(f: &Formula, neg: bool) -> Formula {
    if f.is_propositional() {
        return if neg { negate_prop(f) } else { f.clone() };
    }
    match f {
        Formula::Not(a) => existential_form(a, !neg),
        Formula::And(a, b) if neg => Formula::or(existential_form(a, true), existential_form(b, true)),
        Formula::Or(a, b) if !neg => Formula::or(existential_form(a, false), existential_form(b, false)),
        Formula::Boxed(m, a) if neg => Formula::diamond(*m, existential_form(a, true)),
        Formula::Diamond(m, a) if !neg => Formula::diamond(*m, existential_form(a, false)),
        _ => unreachable!("existential_form called outside the fragment"),
    }
}

fn negate_prop(f: &Formula) -> Formula {
    match f {
        Formula::Not(a) => (**a).clone(),
        Formula::Top => Formula::Bottom,
        Formula::Bottom => Formula::Top,
        _ => Formula::not(f.clone()),
    }
}

/// Least fragment containing the formula, after desugaring.
pub fn classify(f: &Formula) -> Fragment {
    let d = desugar(f);
    let mut ms = BTreeSet::new();
    collect(&d, &mut ms);
    let within = |allowed: &[Modality]| ms.iter().all(|m| allowed.contains(m));
    use Modality::*;
    if ms.is_empty() {
        Fragment::Prop
    } else if within(&[A, Abar]) {
        Fragment::AAbar
    } else if universal(&d, false) {
        Fragment::ForallAAbarBE
    } else if universal(&d, true) {
        Fragment::ExistsAAbarBE
    } else if within(&[A, Abar, Bbar, Ebar]) {
        Fragment::AAbarBbarEbar
    } else if within(&[A, Abar, B, Bbar, Ebar]) {
        Fragment::AAbarBBbarEbar
    } else {
        Fragment::OutOfScope
    }
}

fn collect(f: &Formula, out: &mut BTreeSet<Modality>) {
    match f {
        Formula::Top | Formula::Bottom | Formula::Prop(_) => {}
        Formula::Not(a) => collect(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect(a, out);
            collect(b, out);
        }
        Formula::Diamond(m, a) | Formula::Boxed(m, a) => {
            out.insert(*m);
            collect(a, out);
        }
        Formula::Power { .. } | Formula::BigAnd { .. } => unreachable!("desugared"),
    }
}

/// The formula `[B]^(k-1) F & <B>^(k-2) T`, which holds exactly on tracks of
/// length `k`. Requires `k >= 2`.
pub fn make_ell(k: u32) -> Formula {
    assert!(k >= 2, "tracks have length at least 2");
    Formula::and(
        Formula::Power {
            modality: Modality::B,
            boxed: true,
            exponent: Exponent::Lit(k - 1),
            body: Box::new(Formula::Bottom),
        },
        Formula::Power {
            modality: Modality::B,
            boxed: false,
            exponent: Exponent::Lit(k - 2),
            body: Box::new(Formula::Top),
        },
    )
}
