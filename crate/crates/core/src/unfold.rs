//! Unfolding: conversion of a dependency tree into a binary tree whose
//! internal nodes carry the dependency relations.
//!
//! Every token becomes a leaf. For each head, its dependents are attached
//! one at a time in increasing surface distance (an equidistant left/right
//! pair attaches the left one first). Each attachment wraps the running
//! subtree of the head in a new node labeled with the edge's relation; the
//! dependent's subtree sits on the side on which the dependent occurs in
//! the sentence. For projective input this keeps every node's leaf span
//! contiguous, so an in-order traversal reproduces the surface order.

use crate::treebank::{require_valid, DepTree, InvalidTree, Token};

/// Which child of a node contains the head word of the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadSide {
    Left,
    Right,
}

/// Binary tree over the sentence tokens with relation-labeled internal
/// nodes. Each node remembers the lemmas of the edge it was unfolded from,
/// which the lemma-emitting string operations read back out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnfoldedTree {
    Leaf {
        token: Token,
    },
    Node {
        relation: String,
        head_side: HeadSide,
        left: Box<UnfoldedTree>,
        right: Box<UnfoldedTree>,
        head_lemma: String,
        dep_lemma: String,
    },
}

impl UnfoldedTree {
    /// In-order token sequence of the leaves.
    pub fn leaf_sequence(&self) -> Vec<&Token> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Token>) {
        match self {
            UnfoldedTree::Leaf { token } => out.push(token),
            UnfoldedTree::Node { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    /// Number of internal nodes.
    pub fn node_count(&self) -> usize {
        match self {
            UnfoldedTree::Leaf { .. } => 0,
            UnfoldedTree::Node { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    /// Debug rendering as an s-expression, e.g.
    /// `(obj (nsubj Mary saw) (det a cat))`.
    pub fn to_sexp(&self) -> String {
        match self {
            UnfoldedTree::Leaf { token } => token.form.clone(),
            UnfoldedTree::Node {
                relation,
                left,
                right,
                ..
            } => format!("({} {} {})", relation, left.to_sexp(), right.to_sexp()),
        }
    }
}

/// Unfold a valid dependency tree into its binary form.
pub fn unfold(tree: &DepTree) -> Result<UnfoldedTree, InvalidTree> {
    require_valid(tree)?;
    let root = tree
        .tokens
        .iter()
        .find(|t| t.head == 0)
        .expect("validated tree has a root")
        .index;
    Ok(unfold_token(tree, root))
}

fn unfold_token(tree: &DepTree, head: usize) -> UnfoldedTree {
    let head_tok = tree.token(head);
    let mut deps = tree.dependents(head);
    // Inner to outer; on equal distance the left dependent goes first.
    deps.sort_by_key(|&d| {
        let dist = d.abs_diff(head);
        (dist, d > head)
    });

    let mut running = UnfoldedTree::Leaf {
        token: head_tok.clone(),
    };
    for dep in deps {
        let dep_tok = tree.token(dep);
        let dep_subtree = unfold_token(tree, dep);
        let (left, right, head_side) = if dep < head {
            (dep_subtree, running, HeadSide::Right)
        } else {
            (running, dep_subtree, HeadSide::Left)
        };
        running = UnfoldedTree::Node {
            relation: dep_tok.deprel.clone(),
            head_side,
            left: Box::new(left),
            right: Box::new(right),
            head_lemma: head_tok.lemma.clone(),
            dep_lemma: dep_tok.lemma.clone(),
        };
    }
    running
}
