//! Hash-consed formula DAG with propositions resolved against a structure.

use std::collections::HashMap;

use super::{desugar, Formula, Modality};
use crate::kripke::Kripke;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Top,
    Bottom,
    /// Index into the structure's propositions; `None` for a name the
    /// structure does not know, which holds nowhere.
    Prop(Option<usize>),
    Not(NodeId),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Diamond(Modality, NodeId),
    Boxed(Modality, NodeId),
}

/// A desugared formula stored as a DAG. Equal subformulas share one node,
/// so node ids make good cache keys.
#[derive(Debug, Clone)]
pub struct CompiledFormula {
    nodes: Vec<Node>,
    root: NodeId,
    nest_b: Vec<Option<usize>>,
    propositional: Vec<bool>,
}

impl CompiledFormula {
    /// Desugars and compiles `f` against the propositions of `k`.
    pub fn new(f: &Formula, k: &Kripke) -> Self {
        let mut c = CompiledFormula { nodes: Vec::new(), root: 0, nest_b: Vec::new(), propositional: Vec::new() };
        let mut index = HashMap::new();
        c.root = c.add(&desugar(f), k, &mut index);
        c
    }

    fn intern(&mut self, n: Node, index: &mut HashMap<Node, NodeId>) -> NodeId {
        if let Some(&id) = index.get(&n) {
            return id;
        }
        let id = self.nodes.len();
        let (nb, prop) = match n {
            Node::Top | Node::Bottom | Node::Prop(_) => (Some(0), true),
            Node::Not(a) => (self.nest_b[a], self.propositional[a]),
            Node::And(a, b) | Node::Or(a, b) => (
                self.nest_b[a].zip(self.nest_b[b]).map(|(x, y)| x.max(y)),
                self.propositional[a] && self.propositional[b],
            ),
            Node::Diamond(m, a) | Node::Boxed(m, a) => (
                match m {
                    Modality::B => self.nest_b[a].map(|x| x + 1),
                    Modality::E => None,
                    _ => self.nest_b[a],
                },
                false,
            ),
        };
        self.nodes.push(n);
        self.nest_b.push(nb);
        self.propositional.push(prop);
        index.insert(n, id);
        id
    }

    fn add(&mut self, f: &Formula, k: &Kripke, index: &mut HashMap<Node, NodeId>) -> NodeId {
        let n = match f {
            Formula::Top => Node::Top,
            Formula::Bottom => Node::Bottom,
            Formula::Prop(p) => Node::Prop(k.prop_id(p)),
            Formula::Not(a) => Node::Not(self.add(a, k, index)),
            Formula::And(a, b) => {
                let (a, b) = (self.add(a, k, index), self.add(b, k, index));
                Node::And(a, b)
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.add(a, k, index), self.add(b, k, index));
                Node::Or(a, b)
            }
            Formula::Diamond(m, a) => Node::Diamond(*m, self.add(a, k, index)),
            Formula::Boxed(m, a) => Node::Boxed(*m, self.add(a, k, index)),
            _ => unreachable!("formula is desugared before compilation"),
        };
        self.intern(n, index)
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// B-nesting depth of the subformula, `None` when it contains `E`.
    pub fn nest_b(&self, id: NodeId) -> Option<usize> {
        self.nest_b[id]
    }

    pub fn is_propositional(&self, id: NodeId) -> bool {
        self.propositional[id]
    }

    /// Evaluates a propositional node on a proposition set.
    pub fn eval_prop(&self, id: NodeId, label: crate::kripke::PropSet) -> bool {
        match self.nodes[id] {
            Node::Top => true,
            Node::Bottom => false,
            Node::Prop(p) => p.is_some_and(|p| label.contains(p)),
            Node::Not(a) => !self.eval_prop(a, label),
            Node::And(a, b) => self.eval_prop(a, label) && self.eval_prop(b, label),
            Node::Or(a, b) => self.eval_prop(a, label) || self.eval_prop(b, label),
            Node::Diamond(..) | Node::Boxed(..) => panic!("modal node in propositional evaluation"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn shares_equal_subformulas() {
        let k = Kripke::parse("states: a\ninit: a\nlabel a: p\nedges: a->a\n").unwrap();
        let c = CompiledFormula::new(&parse("<A>p & <B><A>p").unwrap(), &k);
        assert_eq!(c.len(), 4);
        assert_eq!(c.nest_b(c.root()), Some(1));
        let c = CompiledFormula::new(&parse("<E>p").unwrap(), &k);
        assert_eq!(c.nest_b(c.root()), None);
    }
}
