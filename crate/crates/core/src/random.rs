//! Seeded generators for structures and formulas.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{Formula, Modality};
use crate::kripke::Kripke;

/// Shape of random structures.
#[derive(Debug, Clone)]
pub struct KripkeShape {
    pub states: usize,
    /// Probability of each ordered pair being an edge. States left without
    /// a successor get one chosen uniformly.
    pub edge_probability: f64,
    pub props: Vec<String>,
    /// Probability of each proposition labelling each state.
    pub label_probability: f64,
}

pub fn random_kripke(rng: &mut impl Rng, shape: &KripkeShape) -> Kripke {
    let n = shape.states;
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let labels: Vec<Vec<String>> = (0..n)
        .map(|_| shape.props.iter().filter(|_| rng.gen_bool(shape.label_probability)).cloned().collect())
        .collect();
    let mut edges = Vec::new();
    for a in 0..n {
        let before = edges.len();
        for b in 0..n {
            if rng.gen_bool(shape.edge_probability) {
                edges.push((a, b));
            }
        }
        if edges.len() == before {
            edges.push((a, rng.gen_range(0..n)));
        }
    }
    let state_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let prop_refs: Vec<&str> = shape.props.iter().map(String::as_str).collect();
    let label_refs: Vec<Vec<&str>> = labels.iter().map(|l| l.iter().map(String::as_str).collect()).collect();
    let label_pairs: Vec<(&str, &[&str])> =
        state_refs.iter().zip(&label_refs).map(|(s, l)| (*s, l.as_slice())).collect();
    let edge_names: Vec<(&str, &str)> = edges.iter().map(|&(a, b)| (state_refs[a], state_refs[b])).collect();
    Kripke::from_parts(&state_refs, Some(&prop_refs), &label_pairs, &edge_names, state_refs[0])
        .expect("generated structures are valid")
}

/// Shape of random formulas.
#[derive(Debug, Clone)]
pub struct FormulaShape {
    pub props: Vec<String>,
    pub modalities: Vec<Modality>,
    /// Most modal operators in one formula.
    pub max_modalities: usize,
    /// Most nested ⟨B⟩/[B] operators.
    pub max_nest_b: usize,
    /// Most connectives and operators in total.
    pub max_size: usize,
}

pub fn random_formula(rng: &mut impl Rng, shape: &FormulaShape) -> Formula {
    let mut modal_left = rng.gen_range(0..=shape.max_modalities);
    let size = rng.gen_range(1..=shape.max_size.max(1));
    gen(rng, shape, size, &mut modal_left, shape.max_nest_b)
}

fn leaf(rng: &mut impl Rng, shape: &FormulaShape) -> Formula {
    match rng.gen_range(0..10) {
        0 => Formula::Top,
        1 => Formula::Bottom,
        _ => Formula::Prop(shape.props.choose(rng).expect("at least one proposition").clone()),
    }
}

fn gen(rng: &mut impl Rng, shape: &FormulaShape, size: usize, modal_left: &mut usize, nest_left: usize) -> Formula {
    if size <= 1 {
        return leaf(rng, shape);
    }
    let allowed: Vec<Modality> =
        shape.modalities.iter().copied().filter(|&m| m != Modality::B || nest_left > 0).collect();
    let choice = rng.gen_range(0..4);
    if choice == 0 && *modal_left > 0 && !allowed.is_empty() {
        *modal_left -= 1;
        let m = *allowed.choose(rng).expect("nonempty");
        let nest = if m == Modality::B { nest_left - 1 } else { nest_left };
        let body = gen(rng, shape, size - 1, modal_left, nest);
        return if rng.gen_bool(0.5) { Formula::diamond(m, body) } else { Formula::boxed(m, body) };
    }
    match choice {
        1 => Formula::not(gen(rng, shape, size - 1, modal_left, nest_left)),
        _ => {
            let left = rng.gen_range(1..size);
            let a = gen(rng, shape, left, modal_left, nest_left);
            let b = gen(rng, shape, size - left, modal_left, nest_left);
            match rng.gen_range(0..3) {
                0 => Formula::and(a, b),
                1 => Formula::or(a, b),
                _ => Formula::implies(a, b),
            }
        }
    }
}

/// Random formula built from propositional leaves by conjunction and the
/// boxes of `shape.modalities`, sometimes written as `¬⟨X⟩¬`. With
/// modalities among A, Ā, B, E it lies in the universal fragment.
pub fn random_universal_formula(rng: &mut impl Rng, shape: &FormulaShape) -> Formula {
    let mut modal_left = rng.gen_range(0..=shape.max_modalities);
    let size = rng.gen_range(1..=shape.max_size.max(1));
    universal(rng, shape, size, &mut modal_left)
}

fn propositional(rng: &mut impl Rng, shape: &FormulaShape, size: usize) -> Formula {
    let mut none = 0;
    gen(rng, shape, size, &mut none, 0)
}

fn universal(rng: &mut impl Rng, shape: &FormulaShape, size: usize, modal_left: &mut usize) -> Formula {
    if size <= 2 || (*modal_left == 0 && rng.gen_bool(0.5)) {
        return propositional(rng, shape, size.min(3));
    }
    if *modal_left > 0 && !shape.modalities.is_empty() && rng.gen_bool(0.6) {
        *modal_left -= 1;
        let m = *shape.modalities.choose(rng).expect("nonempty");
        let body = universal(rng, shape, size - 1, modal_left);
        return if rng.gen_bool(0.8) {
            Formula::boxed(m, body)
        } else {
            Formula::not(Formula::diamond(m, Formula::not(body)))
        };
    }
    let left = rng.gen_range(1..size);
    let a = universal(rng, shape, left, modal_left);
    let b = universal(rng, shape, size - left, modal_left);
    Formula::and(a, b)
}
