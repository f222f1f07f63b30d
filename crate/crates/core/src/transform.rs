//! The transformation engine: the 14 edgewise string operations, node
//! annotation, and recursive evaluation to an output string.
//!
//! A transformation is a partial map from dependency relations to
//! operations; relations without an entry get `concat`, which makes the
//! empty transformation the identity on projective trees. Evaluation
//! instantiates each node's operation template bottom-up. Two vocabularies
//! appear in the templates: `left`/`right` read the binary tree's linear
//! children, while `head`/`dep` read the side flagged as containing the
//! head word. `bracket-5` is the one non-local operation: all `bracket-5`
//! arguments of one head word share a single pair of brackets and are
//! joined with commas, so each node needs to know its position within the
//! group (first, middle, last, or the only one).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::treebank::{DepTree, InvalidTree};
use crate::unfold::{unfold, HeadSide, UnfoldedTree};

/// The closed inventory of binary string operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operation {
    Concat,
    Rev,
    ConcatRel,
    RevlRel,
    Bracket,
    BrInvert,
    Bracket2,
    Bracket2Inv,
    Bracket3,
    Bracket4,
    Bracket5,
    Triple,
    TripleInv,
    IgnoreDep,
}

impl Operation {
    /// All 14 operations, in inventory order.
    pub const ALL: [Operation; 14] = [
        Operation::Concat,
        Operation::Rev,
        Operation::ConcatRel,
        Operation::RevlRel,
        Operation::Bracket,
        Operation::BrInvert,
        Operation::Bracket2,
        Operation::Bracket2Inv,
        Operation::Bracket3,
        Operation::Bracket4,
        Operation::Bracket5,
        Operation::Triple,
        Operation::TripleInv,
        Operation::IgnoreDep,
    ];

    /// The lower-case hyphenated name used in configs, prefixes and flags.
    pub fn name(self) -> &'static str {
        match self {
            Operation::Concat => "concat",
            Operation::Rev => "rev",
            Operation::ConcatRel => "concat-rel",
            Operation::RevlRel => "revl-rel",
            Operation::Bracket => "bracket",
            Operation::BrInvert => "br-invert",
            Operation::Bracket2 => "bracket-2",
            Operation::Bracket2Inv => "bracket-2-inv",
            Operation::Bracket3 => "bracket-3",
            Operation::Bracket4 => "bracket-4",
            Operation::Bracket5 => "bracket-5",
            Operation::Triple => "triple",
            Operation::TripleInv => "triple-inv",
            Operation::IgnoreDep => "ignore-dep",
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown operation `{0}`")]
pub struct UnknownOperation(pub String);

impl FromStr for Operation {
    type Err = UnknownOperation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Operation::ALL
            .iter()
            .copied()
            .find(|op| op.name() == s)
            .ok_or_else(|| UnknownOperation(s.to_string()))
    }
}

impl Serialize for Operation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Operation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An ordered relation-to-operation map with an implicit `concat` default.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EdgewiseTransform {
    pairs: Vec<(String, Operation)>,
    lookup: HashMap<String, Operation>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("duplicate relation `{0}` in edgewise transform")]
    DuplicateRelation(String),
    #[error("empty relation in edgewise transform")]
    EmptyRelation,
}

impl EdgewiseTransform {
    /// The empty transform: every relation maps to `concat`.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: Vec<(String, Operation)>) -> Result<Self, TransformError> {
        let mut lookup = HashMap::with_capacity(pairs.len());
        for (rel, op) in &pairs {
            if rel.is_empty() {
                return Err(TransformError::EmptyRelation);
            }
            if lookup.insert(rel.clone(), *op).is_some() {
                return Err(TransformError::DuplicateRelation(rel.clone()));
            }
        }
        Ok(EdgewiseTransform { pairs, lookup })
    }

    /// Operation assigned to `relation`; unlisted relations get `concat`.
    pub fn operation_for(&self, relation: &str) -> Operation {
        self.lookup
            .get(relation)
            .copied()
            .unwrap_or(Operation::Concat)
    }

    /// The explicit pairs, in insertion order.
    pub fn pairs(&self) -> &[(String, Operation)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Position of a `bracket-5` node within the group sharing its head word,
/// in inner-to-outer attachment order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bracket5Position {
    Only,
    First,
    Middle,
    Last,
}

/// An unfolded tree with an operation at every node, plus the `bracket-5`
/// position markers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnotatedTree {
    Leaf {
        form: String,
    },
    Node {
        relation: String,
        head_side: HeadSide,
        operation: Operation,
        bracket5: Option<Bracket5Position>,
        left: Box<AnnotatedTree>,
        right: Box<AnnotatedTree>,
        head_lemma: String,
        dep_lemma: String,
    },
}

/// Label every node with the operation looked up from `transform` and
/// compute the `bracket-5` group markers per head word.
pub fn annotate(tree: &UnfoldedTree, transform: &EdgewiseTransform) -> AnnotatedTree {
    // First pass: how many bracket-5 nodes sit on each head word's spine.
    let mut totals: HashMap<usize, usize> = HashMap::new();
    count_bracket5(tree, transform, &mut totals);
    let mut seen: HashMap<usize, usize> = HashMap::new();
    build(tree, transform, &totals, &mut seen).0
}

/// Returns the head token index of the subtree along with the built tree.
/// Recursion visits the head-side child before the node itself, so `seen`
/// counts bracket-5 nodes per head word in inner-to-outer spine order.
fn build(
    tree: &UnfoldedTree,
    transform: &EdgewiseTransform,
    totals: &HashMap<usize, usize>,
    seen: &mut HashMap<usize, usize>,
) -> (AnnotatedTree, usize) {
    match tree {
        UnfoldedTree::Leaf { token } => (
            AnnotatedTree::Leaf {
                form: token.form.clone(),
            },
            token.index,
        ),
        UnfoldedTree::Node {
            relation,
            head_side,
            left,
            right,
            head_lemma,
            dep_lemma,
        } => {
            let (left_built, left_head) = build(left, transform, totals, seen);
            let (right_built, right_head) = build(right, transform, totals, seen);
            let head_token = match head_side {
                HeadSide::Left => left_head,
                HeadSide::Right => right_head,
            };
            let operation = transform.operation_for(relation);
            let bracket5 = if operation == Operation::Bracket5 {
                let total = totals[&head_token];
                let idx = seen.entry(head_token).or_insert(0);
                let position = if total == 1 {
                    Bracket5Position::Only
                } else if *idx == 0 {
                    Bracket5Position::First
                } else if *idx == total - 1 {
                    Bracket5Position::Last
                } else {
                    Bracket5Position::Middle
                };
                *idx += 1;
                Some(position)
            } else {
                None
            };
            (
                AnnotatedTree::Node {
                    relation: relation.clone(),
                    head_side: *head_side,
                    operation,
                    bracket5,
                    left: Box::new(left_built),
                    right: Box::new(right_built),
                    head_lemma: head_lemma.clone(),
                    dep_lemma: dep_lemma.clone(),
                },
                head_token,
            )
        }
    }
}

fn count_bracket5(
    tree: &UnfoldedTree,
    transform: &EdgewiseTransform,
    totals: &mut HashMap<usize, usize>,
) -> usize {
    match tree {
        UnfoldedTree::Leaf { token } => token.index,
        UnfoldedTree::Node {
            relation,
            head_side,
            left,
            right,
            ..
        } => {
            let left_head = count_bracket5(left, transform, totals);
            let right_head = count_bracket5(right, transform, totals);
            let head_token = match head_side {
                HeadSide::Left => left_head,
                HeadSide::Right => right_head,
            };
            if transform.operation_for(relation) == Operation::Bracket5 {
                *totals.entry(head_token).or_insert(0) += 1;
            }
            head_token
        }
    }
}

/// Evaluate an annotated tree bottom-up into the output string. All emitted
/// tokens are joined with single spaces; parentheses, commas, relation
/// labels and the literal `by` are standalone tokens.
pub fn evaluate(tree: &AnnotatedTree) -> String {
    let mut tokens = Vec::new();
    eval_tokens(tree, &mut tokens);
    tokens.join(" ")
}

fn eval_tokens(tree: &AnnotatedTree, out: &mut Vec<String>) {
    match tree {
        AnnotatedTree::Leaf { form } => out.push(form.clone()),
        AnnotatedTree::Node {
            relation,
            head_side,
            operation,
            bracket5,
            left,
            right,
            head_lemma,
            dep_lemma,
        } => {
            let mut l = Vec::new();
            let mut r = Vec::new();
            eval_tokens(left, &mut l);
            eval_tokens(right, &mut r);
            let label = relation.as_str();
            // The concat family reads the linear children; everything else
            // reads the head/dependent sides.
            let (head, dep) = match head_side {
                HeadSide::Left => (&l, &r),
                HeadSide::Right => (&r, &l),
            };
            let push = |out: &mut Vec<String>, s: &str| out.push(s.to_string());
            match operation {
                Operation::Concat => {
                    out.extend_from_slice(&l);
                    out.extend_from_slice(&r);
                }
                Operation::Rev => {
                    out.extend_from_slice(&r);
                    out.extend_from_slice(&l);
                }
                Operation::ConcatRel => {
                    out.extend_from_slice(&l);
                    push(out, label);
                    out.extend_from_slice(&r);
                }
                Operation::RevlRel => {
                    out.extend_from_slice(&r);
                    push(out, label);
                    out.extend_from_slice(&l);
                }
                Operation::Bracket => {
                    out.extend_from_slice(head);
                    push(out, "(");
                    push(out, label);
                    out.extend_from_slice(dep);
                    push(out, ")");
                }
                Operation::BrInvert => {
                    out.extend_from_slice(dep);
                    push(out, "(");
                    push(out, label);
                    push(out, "by");
                    out.extend_from_slice(head);
                    push(out, ")");
                }
                Operation::Bracket2 => {
                    push(out, "(");
                    out.extend_from_slice(head);
                    push(out, label);
                    out.extend_from_slice(dep);
                    push(out, ")");
                }
                Operation::Bracket2Inv => {
                    push(out, "(");
                    out.extend_from_slice(dep);
                    push(out, label);
                    out.extend_from_slice(head);
                    push(out, ")");
                }
                Operation::Bracket3 => {
                    out.extend_from_slice(head);
                    push(out, "(");
                    out.extend_from_slice(dep);
                    push(out, ")");
                }
                Operation::Bracket4 => {
                    out.extend_from_slice(head);
                    push(out, label);
                    push(out, "(");
                    out.extend_from_slice(dep);
                    push(out, ")");
                }
                Operation::Bracket5 => {
                    let position = bracket5.expect("bracket-5 node carries a position marker");
                    let (open, close) = match position {
                        Bracket5Position::Only => ("(", true),
                        Bracket5Position::First => ("(", false),
                        Bracket5Position::Last => (",", true),
                        Bracket5Position::Middle => (",", false),
                    };
                    out.extend_from_slice(head);
                    push(out, open);
                    push(out, label);
                    out.extend_from_slice(dep);
                    if close {
                        push(out, ")");
                    }
                }
                Operation::Triple => {
                    out.extend_from_slice(head);
                    push(out, "(");
                    push(out, head_lemma);
                    push(out, label);
                    push(out, dep_lemma);
                    push(out, ")");
                    out.extend_from_slice(dep);
                }
                Operation::TripleInv => {
                    out.extend_from_slice(head);
                    push(out, "(");
                    push(out, dep_lemma);
                    push(out, label);
                    push(out, "by");
                    push(out, head_lemma);
                    push(out, ")");
                    out.extend_from_slice(dep);
                }
                Operation::IgnoreDep => {
                    out.extend_from_slice(head);
                }
            }
        }
    }
}

/// The full pipeline: unfold, annotate, evaluate.
pub fn apply_transformation(
    tree: &DepTree,
    transform: &EdgewiseTransform,
) -> Result<String, InvalidTree> {
    let unfolded = unfold(tree)?;
    Ok(evaluate(&annotate(&unfolded, transform)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::Token;

    fn tok(index: usize, form: &str, lemma: &str, head: usize, deprel: &str) -> Token {
        Token {
            index,
            form: form.into(),
            lemma: lemma.into(),
            upos: None,
            head,
            deprel: deprel.into(),
        }
    }

    fn t_cat() -> DepTree {
        DepTree {
            sentence_id: "t_cat".into(),
            tokens: vec![
                tok(1, "Mary", "Mary", 2, "nsubj"),
                tok(2, "saw", "see", 0, "root"),
                tok(3, "a", "a", 4, "det"),
                tok(4, "cat", "cat", 2, "obj"),
            ],
        }
    }

    fn apply(pairs: &[(&str, Operation)]) -> String {
        let t = EdgewiseTransform::from_pairs(
            pairs.iter().map(|(r, op)| (r.to_string(), *op)).collect(),
        )
        .unwrap();
        apply_transformation(&t_cat(), &t).unwrap()
    }

    #[test]
    fn operation_names_round_trip() {
        for op in Operation::ALL {
            assert_eq!(op.name().parse::<Operation>().unwrap(), op);
        }
        assert!("brackets".parse::<Operation>().is_err());
    }

    #[test]
    fn default_lookup_is_concat() {
        let t = EdgewiseTransform::from_pairs(vec![("obj".into(), Operation::Rev)]).unwrap();
        assert_eq!(t.operation_for("obj"), Operation::Rev);
        assert_eq!(t.operation_for("nsubj"), Operation::Concat);
    }

    #[test]
    fn duplicate_relations_rejected() {
        let err = EdgewiseTransform::from_pairs(vec![
            ("obj".into(), Operation::Rev),
            ("obj".into(), Operation::Bracket),
        ])
        .unwrap_err();
        assert_eq!(err, TransformError::DuplicateRelation("obj".into()));
    }

    #[test]
    fn annotate_marks_operations() {
        let u = unfold(&t_cat()).unwrap();
        let t = EdgewiseTransform::from_pairs(vec![("obj".into(), Operation::Bracket)]).unwrap();
        let a = annotate(&u, &t);
        match &a {
            AnnotatedTree::Node {
                operation, left, ..
            } => {
                assert_eq!(*operation, Operation::Bracket);
                match left.as_ref() {
                    AnnotatedTree::Node { operation, .. } => {
                        assert_eq!(*operation, Operation::Concat)
                    }
                    _ => panic!(),
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn annotate_bracket5_markers_share_head() {
        let u = unfold(&t_cat()).unwrap();
        let t = EdgewiseTransform::from_pairs(vec![
            ("nsubj".into(), Operation::Bracket5),
            ("obj".into(), Operation::Bracket5),
        ])
        .unwrap();
        let a = annotate(&u, &t);
        // obj node is outermost on `saw`'s spine -> Last; nsubj inner -> First.
        match &a {
            AnnotatedTree::Node { bracket5, left, .. } => {
                assert_eq!(*bracket5, Some(Bracket5Position::Last));
                match left.as_ref() {
                    AnnotatedTree::Node { bracket5, .. } => {
                        assert_eq!(*bracket5, Some(Bracket5Position::First));
                    }
                    _ => panic!(),
                }
            }
            _ => panic!(),
        }
    }

    // The golden rows for every operation, all on "Mary saw a cat" with
    // everything else implicitly concat.

    #[test]
    fn golden_concat() {
        assert_eq!(apply(&[]), "Mary saw a cat");
    }

    #[test]
    fn golden_rev() {
        assert_eq!(apply(&[("obj", Operation::Rev)]), "a cat Mary saw");
    }

    #[test]
    fn golden_concat_rel() {
        assert_eq!(
            apply(&[("obj", Operation::ConcatRel)]),
            "Mary saw obj a cat"
        );
    }

    #[test]
    fn golden_revl_rel() {
        assert_eq!(apply(&[("obj", Operation::RevlRel)]), "a cat obj Mary saw");
    }

    #[test]
    fn golden_bracket() {
        assert_eq!(
            apply(&[("obj", Operation::Bracket)]),
            "Mary saw ( obj a cat )"
        );
    }

    #[test]
    fn golden_br_invert() {
        assert_eq!(
            apply(&[("obj", Operation::BrInvert)]),
            "a cat ( obj by Mary saw )"
        );
    }

    #[test]
    fn golden_bracket_2() {
        assert_eq!(
            apply(&[("obj", Operation::Bracket2)]),
            "( Mary saw obj a cat )"
        );
    }

    #[test]
    fn golden_bracket_2_inv() {
        assert_eq!(
            apply(&[("obj", Operation::Bracket2Inv)]),
            "( a cat obj Mary saw )"
        );
    }

    #[test]
    fn golden_bracket_3() {
        assert_eq!(apply(&[("obj", Operation::Bracket3)]), "Mary saw ( a cat )");
    }

    #[test]
    fn golden_bracket_4() {
        assert_eq!(
            apply(&[("obj", Operation::Bracket4)]),
            "Mary saw obj ( a cat )"
        );
    }

    #[test]
    fn golden_bracket_5_only() {
        assert_eq!(
            apply(&[("obj", Operation::Bracket5)]),
            "Mary saw ( obj a cat )"
        );
    }

    #[test]
    fn golden_bracket_5_pair() {
        assert_eq!(
            apply(&[("nsubj", Operation::Bracket5), ("obj", Operation::Bracket5)]),
            "saw ( nsubj Mary , obj a cat )"
        );
    }

    #[test]
    fn golden_triple() {
        assert_eq!(
            apply(&[("obj", Operation::Triple)]),
            "Mary saw ( see obj cat ) a cat"
        );
    }

    #[test]
    fn golden_triple_inv() {
        assert_eq!(
            apply(&[("obj", Operation::TripleInv)]),
            "Mary saw ( cat obj by see ) a cat"
        );
    }

    #[test]
    fn golden_ignore_dep() {
        assert_eq!(apply(&[("obj", Operation::IgnoreDep)]), "Mary saw");
    }

    #[test]
    fn bracket5_three_arguments() {
        // head with three bracket-5 dependents: first, middle, last
        let tree = DepTree {
            sentence_id: "b5".into(),
            tokens: vec![
                tok(1, "x", "x", 2, "a"),
                tok(2, "h", "h", 0, "root"),
                tok(3, "y", "y", 2, "b"),
                tok(4, "z", "z", 2, "c"),
            ],
        };
        let t = EdgewiseTransform::from_pairs(vec![
            ("a".into(), Operation::Bracket5),
            ("b".into(), Operation::Bracket5),
            ("c".into(), Operation::Bracket5),
        ])
        .unwrap();
        assert_eq!(
            apply_transformation(&tree, &t).unwrap(),
            "h ( a x , b y , c z )"
        );
    }

    #[test]
    fn bracket5_interleaves_with_other_operations() {
        // a (inner) and c (outer) share one bracket-5 group on h's spine;
        // the rev in between applies to the running head string
        let tree = DepTree {
            sentence_id: "mix".into(),
            tokens: vec![
                tok(1, "x", "x", 2, "a"),
                tok(2, "h", "h", 0, "root"),
                tok(3, "y", "y", 2, "b"),
                tok(4, "z", "z", 2, "c"),
            ],
        };
        let t = EdgewiseTransform::from_pairs(vec![
            ("a".into(), Operation::Bracket5),
            ("b".into(), Operation::Rev),
            ("c".into(), Operation::Bracket5),
        ])
        .unwrap();
        assert_eq!(
            apply_transformation(&tree, &t).unwrap(),
            "y h ( a x , c z )"
        );
    }

    #[test]
    fn bracket5_groups_are_per_head_word() {
        // Two different head words, each with a single bracket-5 dependent:
        // both are the Only member of their group.
        let t = EdgewiseTransform::from_pairs(vec![
            ("det".into(), Operation::Bracket5),
            ("obj".into(), Operation::Bracket5),
        ])
        .unwrap();
        assert_eq!(
            apply_transformation(&t_cat(), &t).unwrap(),
            "Mary saw ( obj cat ( det a ) )"
        );
    }

    #[test]
    fn locality_absent_relation_is_inert() {
        let base = apply(&[("obj", Operation::Rev)]);
        let extended = apply(&[("obj", Operation::Rev), ("xcomp", Operation::Bracket)]);
        assert_eq!(base, extended);
    }
}
