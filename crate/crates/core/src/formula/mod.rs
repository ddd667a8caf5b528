//! Formulas of the interval logic: syntax tree, parser, printer, and the
//! syntactic transformations the engines rely on.

mod compiled;
mod parser;
mod transform;

use std::fmt;

use thiserror::Error;

pub use compiled::{CompiledFormula, Node, NodeId};
pub use parser::parse;
pub use transform::{
    classify, desugar, expand, is_exists_fragment, is_forall_fragment, make_ell, modalities, nest_b, to_exists_dual,
    try_expand, Fragment,
};

/// The twelve interval relations. `A` is meets, `B` begins, `E` ends; the
/// `bar` variants are their inverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    A,
    Abar,
    B,
    Bbar,
    E,
    Ebar,
    L,
    Lbar,
    D,
    Dbar,
    O,
    Obar,
}

impl Modality {
    pub const ALL: [Modality; 12] = [
        Modality::A,
        Modality::Abar,
        Modality::B,
        Modality::Bbar,
        Modality::E,
        Modality::Ebar,
        Modality::L,
        Modality::Lbar,
        Modality::D,
        Modality::Dbar,
        Modality::O,
        Modality::Obar,
    ];

    /// Concrete-syntax name, as in `<Ai>`.
    pub fn name(self) -> &'static str {
        match self {
            Modality::A => "A",
            Modality::Abar => "Ai",
            Modality::B => "B",
            Modality::Bbar => "Bi",
            Modality::E => "E",
            Modality::Ebar => "Ei",
            Modality::L => "L",
            Modality::Lbar => "Li",
            Modality::D => "D",
            Modality::Dbar => "Di",
            Modality::O => "O",
            Modality::Obar => "Oi",
        }
    }

    pub fn from_name(name: &str) -> Option<Modality> {
        Modality::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Whether the modality is one of the six primitive ones.
    pub fn is_basic(self) -> bool {
        matches!(self, Modality::A | Modality::Abar | Modality::B | Modality::Bbar | Modality::E | Modality::Ebar)
    }
}

/// Exponent of a repeated modality: a literal or a `AND` index variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Exponent {
    Lit(u32),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bottom,
    Prop(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Diamond(Modality, Box<Formula>),
    Boxed(Modality, Box<Formula>),
    /// `<X>^n body` or `[X]^n body`.
    Power {
        modality: Modality,
        boxed: bool,
        exponent: Exponent,
        body: Box<Formula>,
    },
    /// `AND var=lo..hi (body)`.
    BigAnd {
        var: String,
        lo: u32,
        hi: u32,
        body: Box<Formula>,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("parse error at offset {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("exponent {0} exceeds 2^31")]
    Overflow(String),
    #[error("unbound index `{0}`")]
    UnboundIndex(String),
    #[error("empty range {lo}..{hi}")]
    EmptyRange { lo: u32, hi: u32 },
    #[error("expansion exceeds {0} nodes")]
    TooLarge(usize),
    #[error("modality {0} is outside the fragment")]
    UnsupportedModality(&'static str),
    #[error("formula is not in the {0} fragment")]
    NotInFragment(&'static str),
}

pub fn prop(name: &str) -> Formula {
    Formula::Prop(name.to_string())
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn diamond(m: Modality, f: Formula) -> Formula {
        Formula::Diamond(m, Box::new(f))
    }

    pub fn boxed(m: Modality, f: Formula) -> Formula {
        Formula::Boxed(m, Box::new(f))
    }

    /// Conjunction of all items; `T` when empty.
    pub fn all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::Top)
    }

    /// Disjunction of all items; `F` when empty.
    pub fn any(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::Bottom)
    }

    /// Whether the formula contains no modality at all.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Top | Formula::Bottom | Formula::Prop(_) => true,
            Formula::Not(a) => a.is_propositional(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_propositional() && b.is_propositional()
            }
            Formula::Diamond(..) | Formula::Boxed(..) | Formula::Power { .. } => false,
            Formula::BigAnd { body, .. } => body.is_propositional(),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top | Formula::Bottom | Formula::Prop(_) => 1,
            Formula::Not(a) | Formula::Diamond(_, a) | Formula::Boxed(_, a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Power { body, .. } | Formula::BigAnd { body, .. } => 1 + body.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            _ => 5,
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, c: &Formula, min: u8) -> fmt::Result {
            if c.precedence() < min {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        }
        match self {
            Formula::Top => write!(f, "T"),
            Formula::Bottom => write!(f, "F"),
            Formula::Prop(p) => write!(f, "{p}"),
            Formula::Not(a) => {
                write!(f, "!")?;
                child(f, a, 5)
            }
            Formula::And(a, b) => {
                child(f, a, 4)?;
                write!(f, " & ")?;
                child(f, b, 5)
            }
            Formula::Or(a, b) => {
                child(f, a, 3)?;
                write!(f, " | ")?;
                child(f, b, 4)
            }
            Formula::Implies(a, b) => {
                child(f, a, 3)?;
                write!(f, " -> ")?;
                child(f, b, 2)
            }
            Formula::Iff(a, b) => {
                child(f, a, 2)?;
                write!(f, " <-> ")?;
                child(f, b, 1)
            }
            Formula::Diamond(m, a) => {
                write!(f, "<{}>", m.name())?;
                child(f, a, 5)
            }
            Formula::Boxed(m, a) => {
                write!(f, "[{}]", m.name())?;
                child(f, a, 5)
            }
            Formula::Power { modality, boxed, exponent, body } => {
                if *boxed {
                    write!(f, "[{}]", modality.name())?;
                } else {
                    write!(f, "<{}>", modality.name())?;
                }
                match exponent {
                    Exponent::Lit(n) => write!(f, "^{n} ")?,
                    Exponent::Var(v) => write!(f, "^{v} ")?,
                }
                child(f, body, 5)
            }
            Formula::BigAnd { var, lo, hi, body } => write!(f, "AND {var}={lo}..{hi} ({body})"),
        }
    }
}
