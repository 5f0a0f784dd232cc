use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::simplex::{Alphabet, ProbVec};

/// A complete context tree. Edges from the root read the past backwards:
/// the first edge is the most recent symbol.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextTree {
    Leaf(ProbVec),
    Node(Vec<ContextTree>),
}

/// JSON shape of a tree node: `{"probs": [...]}` or `{"children": {"label": node, ...}}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TreeSpec {
    Leaf {
        probs: Vec<f64>,
    },
    Node {
        children: BTreeMap<String, TreeSpec>,
    },
}

impl ContextTree {
    pub fn from_spec(alphabet: &Alphabet, spec: &TreeSpec) -> Result<Self> {
        match spec {
            TreeSpec::Leaf { probs } => Ok(ContextTree::Leaf(ProbVec::new(
                alphabet.clone(),
                probs.clone(),
            )?)),
            TreeSpec::Node { children } => {
                if children.len() != alphabet.len() {
                    return Err(Error::InvalidSpec(format!(
                        "context tree node has {} children, alphabet has {} symbols",
                        children.len(),
                        alphabet.len()
                    )));
                }
                let mut slots: Vec<Option<ContextTree>> = vec![None; alphabet.len()];
                for (label, child) in children {
                    let i = alphabet.index_of(label)?;
                    slots[i] = Some(Self::from_spec(alphabet, child)?);
                }
                Ok(ContextTree::Node(
                    slots
                        .into_iter()
                        .map(|c| c.expect("all labels present"))
                        .collect(),
                ))
            }
        }
    }

    /// Full tree of depth `order` whose leaf for the context `c` (oldest first) is `law(c)`.
    pub fn full(
        alphabet: &Alphabet,
        order: usize,
        law: &mut impl FnMut(&[usize]) -> Result<ProbVec>,
    ) -> Result<Self> {
        fn build(
            alphabet: &Alphabet,
            depth: usize,
            path: &mut Vec<usize>,
            law: &mut impl FnMut(&[usize]) -> Result<ProbVec>,
        ) -> Result<ContextTree> {
            if depth == 0 {
                let ctx: Vec<usize> = path.iter().rev().copied().collect();
                return Ok(ContextTree::Leaf(law(&ctx)?));
            }
            let mut children = Vec::with_capacity(alphabet.len());
            for a in 0..alphabet.len() {
                path.push(a);
                children.push(build(alphabet, depth - 1, path, law)?);
                path.pop();
            }
            Ok(ContextTree::Node(children))
        }
        build(alphabet, order, &mut Vec::new(), law)
    }

    pub fn depth(&self) -> usize {
        match self {
            ContextTree::Leaf(_) => 0,
            ContextTree::Node(ch) => 1 + ch.iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }

    /// Leaf reached by reading `z` (most recent last) backwards, with its depth.
    /// `None` when `z` ends before a leaf is reached.
    pub fn lookup(&self, z: &[usize]) -> Option<(&ProbVec, usize)> {
        let mut node = self;
        let mut depth = 0;
        loop {
            match node {
                ContextTree::Leaf(p) => return Some((p, depth)),
                ContextTree::Node(ch) => {
                    let i = z.len().checked_sub(depth + 1)?;
                    node = &ch[z[i]];
                    depth += 1;
                }
            }
        }
    }

    /// Leaf for a context given most-recent-first.
    pub(crate) fn lookup_rev(&self, path: &[usize]) -> Option<&ProbVec> {
        let mut node = self;
        let mut it = path.iter();
        loop {
            match node {
                ContextTree::Leaf(p) => return Some(p),
                ContextTree::Node(ch) => node = &ch[*it.next()?],
            }
        }
    }

    /// Leaf paths, most recent symbol first.
    pub(crate) fn leaf_paths(&self) -> Vec<Vec<usize>> {
        fn walk(t: &ContextTree, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            match t {
                ContextTree::Leaf(_) => out.push(path.clone()),
                ContextTree::Node(ch) => {
                    for (a, c) in ch.iter().enumerate() {
                        path.push(a);
                        walk(c, path, out);
                        path.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> Alphabet {
        Alphabet::new(["0", "1"]).unwrap()
    }

    #[test]
    fn parses_nested_json() {
        let a = binary();
        let spec: TreeSpec = serde_json::from_str(
            r#"{"children": {"0": {"probs": [0.9, 0.1]},
                             "1": {"children": {"0": {"probs": [0.5, 0.5]},
                                                "1": {"probs": [0.2, 0.8]}}}}}"#,
        )
        .unwrap();
        let t = ContextTree::from_spec(&a, &spec).unwrap();
        assert_eq!(t.depth(), 2);
        // z = ..., 0, 1 (most recent last): read 1 then 0.
        let (p, d) = t.lookup(&[0, 1]).unwrap();
        assert_eq!(d, 2);
        assert_eq!(p.entries(), &[0.5, 0.5]);
        assert_eq!(t.lookup(&[1, 0]).unwrap().1, 1);
        assert!(t.lookup(&[1]).is_none());
        assert_eq!(t.leaf_paths().len(), 3);
    }

    #[test]
    fn rejects_missing_children() {
        let spec: TreeSpec =
            serde_json::from_str(r#"{"children": {"0": {"probs": [1.0, 0.0]}}}"#).unwrap();
        assert_eq!(
            ContextTree::from_spec(&binary(), &spec).unwrap_err().code(),
            "INVALID_SPEC"
        );
    }
}
