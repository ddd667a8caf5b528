//! Structures and formulas encoding quantified Boolean formulas (checked
//! with A and B̄) and satisfiability (checked with a propositional formula).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::formula::{parse, prop, try_expand, Formula, FormulaError, Modality};
use crate::kripke::{Kripke, KripkeError, StateId};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("matrix is not propositional")]
    NotPropositional,
    #[error("variable `{0}` is bound twice")]
    Rebound(String),
    #[error("variable `{0}` is free")]
    Free(String),
    #[error("variable name `{0}` clashes with a generated proposition")]
    Reserved(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    fn symbol(self) -> &'static str {
        match self {
            Quantifier::Exists => "E",
            Quantifier::Forall => "A",
        }
    }
}

/// Prenex quantified Boolean formula. `prefix[0]` is the outermost
/// quantifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qbf {
    prefix: Vec<(Quantifier, String)>,
    matrix: Formula,
}

/// Value of a propositional formula under the assignment `truth`.
fn eval_with(f: &Formula, truth: &dyn Fn(&str) -> bool) -> bool {
    match f {
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Prop(p) => truth(p),
        Formula::Not(a) => !eval_with(a, truth),
        Formula::And(a, b) => eval_with(a, truth) && eval_with(b, truth),
        Formula::Or(a, b) => eval_with(a, truth) || eval_with(b, truth),
        Formula::Implies(a, b) => !eval_with(a, truth) || eval_with(b, truth),
        Formula::Iff(a, b) => eval_with(a, truth) == eval_with(b, truth),
        _ => unreachable!("expanded propositional formula"),
    }
}

fn props_of(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::Prop(p) => {
            out.insert(p.clone());
        }
        Formula::Not(a) => props_of(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            props_of(a, out);
            props_of(b, out);
        }
        _ => {}
    }
}

impl Qbf {
    pub fn new(prefix: Vec<(Quantifier, String)>, matrix: Formula) -> Result<Self, ReductionError> {
        if !matrix.is_propositional() {
            return Err(ReductionError::NotPropositional);
        }
        let matrix = try_expand(&matrix, 1 << 20)?;
        let mut bound = BTreeSet::new();
        for (_, v) in &prefix {
            if !bound.insert(v.clone()) {
                return Err(ReductionError::Rebound(v.clone()));
            }
        }
        for (_, v) in &prefix {
            if v == "start" || v.strip_suffix("_aux").is_some_and(|base| bound.contains(base)) {
                return Err(ReductionError::Reserved(v.clone()));
            }
        }
        let mut used = BTreeSet::new();
        props_of(&matrix, &mut used);
        if let Some(free) = used.difference(&bound).next() {
            return Err(ReductionError::Free(free.clone()));
        }
        Ok(Qbf { prefix, matrix })
    }

    pub fn prefix(&self) -> &[(Quantifier, String)] {
        &self.prefix
    }

    pub fn matrix(&self) -> &Formula {
        &self.matrix
    }

    pub fn num_vars(&self) -> usize {
        self.prefix.len()
    }

    /// Parses a quantifier line such as `E x3 A x2 E x1` followed by the
    /// matrix. Without quantifiers the text is just the matrix.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let Some(&(first_line, first)) = lines.first() else {
            return Err(ReductionError::Parse { line: 1, message: "empty input".into() });
        };
        let words: Vec<&str> = first.split_whitespace().collect();
        let is_prefix = words.len() % 2 == 0 && words.chunks(2).all(|c| matches!(c[0], "E" | "A"));
        let (prefix, rest) = if is_prefix {
            let prefix = words
                .chunks(2)
                .map(|c| (if c[0] == "E" { Quantifier::Exists } else { Quantifier::Forall }, c[1].to_string()))
                .collect();
            (prefix, &lines[1..])
        } else {
            (Vec::new(), &lines[..])
        };
        let body: Vec<&str> = rest.iter().map(|(_, l)| *l).collect();
        if body.is_empty() {
            return Err(ReductionError::Parse { line: first_line, message: "missing matrix".into() });
        }
        let matrix = parse(&body.join(" "))?;
        Qbf::new(prefix, matrix)
    }

    /// Truth of the closed formula, by expanding every quantifier.
    pub fn eval(&self) -> bool {
        let mut assignment = HashMap::new();
        self.eval_from(0, &mut assignment)
    }

    fn eval_from(&self, i: usize, assignment: &mut HashMap<String, bool>) -> bool {
        let Some((q, v)) = self.prefix.get(i) else {
            return eval_with(&self.matrix, &|p| assignment[p]);
        };
        let branch = |value: bool, assignment: &mut HashMap<String, bool>| {
            assignment.insert(v.clone(), value);
            self.eval_from(i + 1, assignment)
        };
        match q {
            Quantifier::Exists => branch(false, assignment) || branch(true, assignment),
            Quantifier::Forall => branch(false, assignment) && branch(true, assignment),
        }
    }

    /// Random formula over `x<n> … x1` (outermost first) whose matrix has
    /// at most `matrix_size` nodes.
    pub fn random(rng: &mut impl Rng, n: usize, matrix_size: usize) -> Qbf {
        let vars: Vec<String> = (1..=n).rev().map(|i| format!("x{i}")).collect();
        let prefix = vars
            .iter()
            .map(|v| (if rng.gen_bool(0.5) { Quantifier::Exists } else { Quantifier::Forall }, v.clone()))
            .collect();
        let size = rng.gen_range(1..=matrix_size.max(1));
        let matrix = random_matrix(rng, &vars, size);
        Qbf::new(prefix, matrix).expect("generated formulas are closed")
    }
}

fn random_matrix(rng: &mut impl Rng, vars: &[String], size: usize) -> Formula {
    if vars.is_empty() {
        return if rng.gen_bool(0.5) { Formula::Top } else { Formula::Bottom };
    }
    if size <= 1 {
        return prop(vars.choose(rng).expect("nonempty"));
    }
    match rng.gen_range(0..4) {
        0 => Formula::not(random_matrix(rng, vars, size - 1)),
        k => {
            let left = rng.gen_range(1..size);
            let a = random_matrix(rng, vars, left);
            let b = random_matrix(rng, vars, size - left);
            match k {
                1 => Formula::and(a, b),
                2 => Formula::or(a, b),
                _ => Formula::implies(a, b),
            }
        }
    }
}

impl fmt::Display for Qbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.prefix.is_empty() {
            let words: Vec<String> = self.prefix.iter().map(|(q, v)| format!("{} {v}", q.symbol())).collect();
            writeln!(f, "{}", words.join(" "))?;
        }
        writeln!(f, "{}", self.matrix)
    }
}

/// Structure whose initial tracks spell assignments, and the formula that
/// holds on it exactly when `qbf` is true.
pub fn qbf_to_kripke(qbf: &Qbf) -> (Kripke, Formula) {
    let vars: Vec<&str> = qbf.prefix.iter().map(|(_, v)| v.as_str()).collect();
    let aux = |v: &str| format!("{v}_aux");
    let mut states = vec!["w0".to_string(), "w1".to_string()];
    let mut labels: Vec<(String, Vec<String>)> = Vec::new();
    let all: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
    let mut with_start = all.clone();
    with_start.push("start".into());
    labels.push(("w0".into(), with_start.clone()));
    labels.push(("w1".into(), with_start));
    for v in &vars {
        for tag in ["t1", "t2", "f1", "f2"] {
            let name = format!("{v}_{tag}");
            let mut label: Vec<String> =
                if tag.starts_with('t') { all.clone() } else { all.iter().filter(|x| x != v).cloned().collect() };
            label.push(aux(v));
            states.push(name.clone());
            labels.push((name, label));
        }
    }
    states.push("sink".into());
    labels.push(("sink".into(), all.clone()));

    let mut edges: Vec<(String, String)> = vec![("w0".into(), "w1".into())];
    let mut from = vec!["w1".to_string()];
    for v in &vars {
        for f in &from {
            edges.push((f.clone(), format!("{v}_t1")));
            edges.push((f.clone(), format!("{v}_f1")));
        }
        edges.push((format!("{v}_t1"), format!("{v}_t2")));
        edges.push((format!("{v}_f1"), format!("{v}_f2")));
        from = vec![format!("{v}_t2"), format!("{v}_f2")];
    }
    for f in &from {
        edges.push((f.clone(), "sink".into()));
    }
    edges.push(("sink".into(), "sink".into()));

    let mut props = all.clone();
    props.push("start".into());
    props.extend(vars.iter().map(|v| aux(v)));

    let state_refs: Vec<&str> = states.iter().map(String::as_str).collect();
    let prop_refs: Vec<&str> = props.iter().map(String::as_str).collect();
    let label_refs: Vec<Vec<&str>> = labels.iter().map(|(_, l)| l.iter().map(String::as_str).collect()).collect();
    let label_pairs: Vec<(&str, &[&str])> =
        labels.iter().zip(&label_refs).map(|((s, _), l)| (s.as_str(), l.as_slice())).collect();
    let edge_refs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let k = Kripke::from_parts(&state_refs, Some(&prop_refs), &label_pairs, &edge_refs, "w0")
        .expect("generated structures are valid");

    // Innermost quantifier first.
    let mut xi = qbf.matrix.clone();
    for (q, v) in qbf.prefix.iter().rev() {
        let chosen = Formula::diamond(Modality::A, prop(&aux(v)));
        xi = match q {
            Quantifier::Exists => Formula::diamond(Modality::Bbar, Formula::and(chosen, xi)),
            Quantifier::Forall => Formula::boxed(Modality::Bbar, Formula::implies(chosen, xi)),
        };
    }
    (k, Formula::implies(prop("start"), xi))
}

/// Conjunction of clauses over variables `x1 … xn`; literal `i` stands for
/// `xi` and `-i` for its negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new(vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, ReductionError> {
        if vars == 0 {
            return Err(ReductionError::Parse { line: 0, message: "at least one variable is required".into() });
        }
        for c in &clauses {
            if let Some(&l) = c.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > vars) {
                return Err(ReductionError::Parse { line: 0, message: format!("literal {l} out of range") });
            }
        }
        Ok(Cnf { vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Parses `p cnf <vars> <clauses>` followed by zero-terminated clause
    /// lines; lines starting with `c` are comments.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let mut vars = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('c') {
                continue;
            }
            let err = |message: String| ReductionError::Parse { line, message };
            if let Some(header) = l.strip_prefix('p') {
                let w: Vec<&str> = header.split_whitespace().collect();
                if w.len() != 3 || w[0] != "cnf" || vars.is_some() {
                    return Err(err("expected a single `p cnf <vars> <clauses>` header".into()));
                }
                vars = Some(w[1].parse::<usize>().map_err(|e| err(e.to_string()))?);
                continue;
            }
            if vars.is_none() {
                return Err(err("clause before the header".into()));
            }
            for w in l.split_whitespace() {
                let lit: i32 = w.parse().map_err(|_| err(format!("bad literal `{w}`")))?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(lit);
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        let vars = vars.ok_or(ReductionError::Parse { line: 1, message: "missing header".into() })?;
        Cnf::new(vars, clauses)
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    /// First satisfying assignment in binary counting order.
    pub fn brute_force(&self) -> Option<Vec<bool>> {
        (0u64..1 << self.vars)
            .map(|bits| (0..self.vars).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.eval(a))
    }

    /// The formula as a propositional formula over `x1 … xn`.
    pub fn to_formula(&self) -> Formula {
        Formula::all(self.clauses.iter().map(|c| {
            Formula::any(c.iter().map(|&l| {
                let p = prop(&format!("x{}", l.unsigned_abs()));
                if l > 0 {
                    p
                } else {
                    Formula::not(p)
                }
            }))
        }))
    }

    /// Random formula with clauses of `width` distinct variables (fewer
    /// when there are fewer variables).
    pub fn random(rng: &mut impl Rng, vars: usize, clauses: usize, width: usize) -> Cnf {
        let all: Vec<i32> = (1..=vars as i32).collect();
        let clauses = (0..clauses)
            .map(|_| {
                all.choose_multiple(rng, width.min(vars)).map(|&v| if rng.gen_bool(0.5) { v } else { -v }).collect()
            })
            .collect();
        Cnf::new(vars, clauses).expect("generated literals are in range")
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.vars, self.clauses.len())?;
        for c in &self.clauses {
            for l in c {
                write!(f, "{l} ")?;
            }
            writeln!(f, "0")?;
        }
        Ok(())
    }
}

/// Structure whose initial tracks induce every assignment, and `¬β`, which
/// fails on it exactly when `β` is satisfiable.
pub fn sat_to_kripke(cnf: &Cnf) -> (Kripke, Formula) {
    let n = cnf.vars;
    let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut states = vec!["w0".to_string()];
    let mut labels = vec![vars.clone()];
    for (i, x) in vars.iter().enumerate() {
        states.push(format!("w{}_t", i + 1));
        labels.push(vars.clone());
        states.push(format!("w{}_f", i + 1));
        labels.push(vars.iter().filter(|y| *y != x).cloned().collect());
    }
    let mut edges = vec![("w0".to_string(), "w1_t".to_string()), ("w0".to_string(), "w1_f".to_string())];
    for i in 1..n {
        for a in ["t", "f"] {
            for b in ["t", "f"] {
                edges.push((format!("w{i}_{a}"), format!("w{}_{b}", i + 1)));
            }
        }
    }
    for a in ["t", "f"] {
        edges.push((format!("w{n}_{a}"), format!("w{n}_{a}")));
    }
    let state_refs: Vec<&str> = states.iter().map(String::as_str).collect();
    let prop_refs: Vec<&str> = vars.iter().map(String::as_str).collect();
    let label_refs: Vec<Vec<&str>> = labels.iter().map(|l| l.iter().map(String::as_str).collect()).collect();
    let label_pairs: Vec<(&str, &[&str])> =
        state_refs.iter().zip(&label_refs).map(|(s, l)| (*s, l.as_slice())).collect();
    let edge_refs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let k = Kripke::from_parts(&state_refs, Some(&prop_refs), &label_pairs, &edge_refs, "w0")
        .expect("generated structures are valid");
    (k, Formula::not(cnf.to_formula()))
}

/// Assignment induced by a track of the satisfiability structure: `xi` is
/// true iff it labels every state of the track.
pub fn decode_assignment(kripke: &Kripke, track: &[StateId]) -> Vec<bool> {
    let label = kripke.track_label(track);
    (1..).map_while(|i| kripke.prop_id(&format!("x{i}"))).map(|p| label.contains(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qbf_text_round_trip() {
        let q = Qbf::parse("# sample\nE x2 A x1\n(x2 | x1) &\n (x2 | !x1)\n").unwrap();
        assert_eq!(q.num_vars(), 2);
        assert!(q.eval());
        assert_eq!(Qbf::parse(&q.to_string()).unwrap(), q);
        let open = Qbf::parse("T").unwrap();
        assert_eq!(open.num_vars(), 0);
        assert!(Qbf::parse("E x\ny").is_err());
        assert!(Qbf::parse("E x E x\nx").is_err());
    }

    #[test]
    fn cnf_text_round_trip() {
        let c = Cnf::parse("c two clauses\np cnf 2 2\n1 -2 0\n2 0\n").unwrap();
        assert_eq!(c.clauses(), &[vec![1, -2], vec![2]]);
        assert_eq!(c.brute_force(), Some(vec![true, true]));
        assert_eq!(Cnf::parse(&c.to_string()).unwrap(), c);
        assert!(Cnf::parse("p cnf 1 1\n2 0\n").is_err());
    }

    #[test]
    fn construction_sizes() {
        let q = Qbf::parse("E x A y E z\nx | y | z").unwrap();
        let (k, _) = qbf_to_kripke(&q);
        assert_eq!(k.num_states(), 15);
        let f1 = k.state_id("x_f1").unwrap();
        let names: Vec<&str> = k.label(f1).iter().map(|p| k.prop_names()[p].as_str()).collect();
        assert_eq!(names, ["y", "z", "x_aux"]);
        let (k, _) = sat_to_kripke(&Cnf::new(4, vec![vec![1]]).unwrap());
        assert_eq!(k.num_states(), 9);
        let w2f = k.state_id("w2_f").unwrap();
        let names: Vec<&str> = k.label(w2f).iter().map(|p| k.prop_names()[p].as_str()).collect();
        assert_eq!(names, ["x1", "x3", "x4"]);
    }

    #[test]
    fn empty_prefix_structure() {
        let (k, _) = qbf_to_kripke(&Qbf::parse("T").unwrap());
        let edges: Vec<(usize, usize)> =
            (0..k.num_states()).flat_map(|a| k.successors(a).iter().map(move |&b| (a, b))).collect();
        let id = |s| k.state_id(s).unwrap();
        assert_eq!(edges, [(id("w0"), id("w1")), (id("w1"), id("sink")), (id("sink"), id("sink"))]);
    }
}
