//! B_k-descriptors: trees labelled with descriptor elements, whose children
//! are the B_(k-1)-descriptors of all proper prefixes, up to isomorphism.

use std::collections::BTreeMap;
use std::rc::Rc;

use thiserror::Error;

use super::DescriptorElement;
use crate::kripke::{Kripke, StateId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DescriptorError {
    #[error("estimated descriptor size {estimate} exceeds the cap {cap}")]
    TooLarge { estimate: u128, cap: u128 },
    #[error("tracks have length at least 2")]
    TooShort,
}

/// A B_k-descriptor in canonical form: children are sorted and distinct,
/// so two descriptors are isomorphic iff they are equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BkDescriptor {
    canonical: Rc<str>,
    root: DescriptorElement,
    children: Vec<Rc<BkDescriptor>>,
}

impl BkDescriptor {
    pub fn root(&self) -> DescriptorElement {
        self.root
    }

    pub fn children(&self) -> &[Rc<BkDescriptor>] {
        &self.children
    }

    /// Serialisation with children in sorted order; equal strings mean
    /// isomorphic descriptors.
    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    pub fn height(&self) -> usize {
        self.children.iter().map(|c| c.height() + 1).max().unwrap_or(0)
    }

    /// Nodes of the tree, counting shared subtrees once per occurrence.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Indented rendering with state names.
    pub fn render(&self, k: &Kripke) -> String {
        fn go(d: &BkDescriptor, k: &Kripke, depth: usize, out: &mut String) {
            out.push_str(&"  ".repeat(depth));
            out.push_str(&d.root.display(k));
            out.push('\n');
            for c in &d.children {
                go(c, k, depth + 1, out);
            }
        }
        let mut out = String::new();
        go(self, k, 0, &mut out);
        out
    }
}

/// Upper estimate of the node count of a B_k-descriptor for a track of
/// length `n`, before merging isomorphic children.
pub fn estimate_nodes(n: usize, k: usize) -> u128 {
    let b = n.saturating_sub(2) as u128;
    let mut total: u128 = 0;
    let mut pow: u128 = 1;
    for _ in 0..=k {
        total = total.saturating_add(pow);
        pow = pow.saturating_mul(b);
    }
    total
}

fn leaf_key(d: &DescriptorElement) -> String {
    let inner: Vec<String> = d.internal.iter().map(|s| s.to_string()).collect();
    format!("({},{{{}}},{})", d.initial, inner.join(","), d.last)
}

/// Builds the B_k-descriptor of a track, refusing when [`estimate_nodes`]
/// exceeds `cap`.
pub fn build_bk_descriptor(track: &[StateId], k: usize, cap: u128) -> Result<BkDescriptor, DescriptorError> {
    let n = track.len();
    if n < 2 {
        return Err(DescriptorError::TooShort);
    }
    let estimate = estimate_nodes(n, k);
    if estimate > cap {
        return Err(DescriptorError::TooLarge { estimate, cap });
    }
    // level[m] is the descriptor of the prefix of length m at the current depth.
    let roots: Vec<Option<DescriptorElement>> =
        (0..=n).map(|m| (m >= 2).then(|| DescriptorElement::of_track(&track[..m]))).collect();
    let mut level: Vec<Option<Rc<BkDescriptor>>> = roots
        .iter()
        .map(|r| r.map(|root| Rc::new(BkDescriptor { canonical: leaf_key(&root).into(), root, children: Vec::new() })))
        .collect();
    for _ in 0..k {
        let mut next = vec![None; n + 1];
        let mut below: BTreeMap<Rc<str>, Rc<BkDescriptor>> = BTreeMap::new();
        for m in 2..=n {
            if m > 2 {
                let c = level[m - 1].clone().expect("prefix descriptor");
                below.insert(c.canonical.clone(), c);
            }
            let root = roots[m].expect("prefix root");
            let children: Vec<Rc<BkDescriptor>> = below.values().cloned().collect();
            let mut canonical = leaf_key(&root);
            if !children.is_empty() {
                canonical.push('[');
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        canonical.push(',');
                    }
                    canonical.push_str(&c.canonical);
                }
                canonical.push(']');
            }
            next[m] = Some(Rc::new(BkDescriptor { canonical: canonical.into(), root, children }));
        }
        level = next;
    }
    Ok(Rc::try_unwrap(level[n].take().expect("full track descriptor")).unwrap_or_else(|rc| (*rc).clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_tracks_are_leaves() {
        let d = build_bk_descriptor(&[0, 1], 5, u128::MAX).unwrap();
        assert!(d.children().is_empty());
        assert_eq!(d.canonical(), "(0,{},1)");
    }

    #[test]
    fn refuses_oversized_requests() {
        let t = vec![0; 40];
        assert!(matches!(build_bk_descriptor(&t, 6, 1_000_000), Err(DescriptorError::TooLarge { .. })));
    }

    #[test]
    fn b1_children_are_prefix_elements() {
        // a a a b: prefixes aa, aaa have elements (a,{},a), (a,{a},a)
        let d = build_bk_descriptor(&[0, 0, 0, 1], 1, u128::MAX).unwrap();
        assert_eq!(d.children().len(), 2);
        let d = build_bk_descriptor(&[0, 0, 0, 0, 1], 1, u128::MAX).unwrap();
        assert_eq!(d.children().len(), 2);
    }
}
