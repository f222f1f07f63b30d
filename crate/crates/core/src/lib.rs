//! Syntactic transformations over Universal Dependencies trees.
//!
//! The pipeline has three steps: a dependency tree is *unfolded* into a
//! binary tree whose internal nodes carry the dependency labels, the nodes
//! are annotated with string operations looked up per relation (an
//! *edgewise transform*), and the annotated tree is evaluated bottom-up
//! into a single output string.
//!
//! ```
//! use deptrans::treebank::parse_conllu;
//! use deptrans::transform::{apply_transformation, EdgewiseTransform, Operation};
//!
//! let conllu = "\
//! 1\tMary\tMary\tPROPN\t_\t_\t2\tnsubj\t_\t_
//! 2\tsaw\tsee\tVERB\t_\t_\t0\troot\t_\t_
//! 3\ta\ta\tDET\t_\t_\t4\tdet\t_\t_
//! 4\tcat\tcat\tNOUN\t_\t_\t2\tobj\t_\t_
//! ";
//! let tree = &parse_conllu(conllu.as_bytes()).unwrap()[0];
//! let t = EdgewiseTransform::from_pairs(vec![("obj".into(), Operation::Rev)]).unwrap();
//! assert_eq!(apply_transformation(tree, &t).unwrap(), "a cat Mary saw");
//! ```
//!
//! On top of the transformation engine, [`datagen`] samples random
//! transformations and emits deterministic pre-training datasets,
//! [`stats`] computes treebank statistics, and [`align`] / [`logform`]
//! implement the alignment-based conjunct reordering and logical-form
//! normalization used for semantic-parsing corpora.

pub mod align;
pub mod datagen;
pub mod logform;
pub mod stats;
pub mod transform;
pub mod treebank;
pub mod unfold;

pub use transform::{apply_transformation, EdgewiseTransform, Operation};
pub use treebank::{parse_conllu, DepTree, Token};
pub use unfold::{unfold, UnfoldedTree};
