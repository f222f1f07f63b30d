//! Shared fixtures, random tree generators and independent reference
//! implementations (oracles) for the integration suites. The oracles are
//! deliberately written as straight-line brute force, separate from the
//! library's code paths.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use deptrans::treebank::{DepTree, Token};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn token(index: usize, form: &str, lemma: &str, head: usize, deprel: &str) -> Token {
    Token {
        index,
        form: form.into(),
        lemma: lemma.into(),
        upos: None,
        head,
        deprel: deprel.into(),
    }
}

/// "Mary saw a cat", the worked example of the operation inventory.
pub fn t_cat() -> DepTree {
    DepTree {
        sentence_id: "t_cat".into(),
        tokens: vec![
            token(1, "Mary", "Mary", 2, "nsubj"),
            token(2, "saw", "see", 0, "root"),
            token(3, "a", "a", 4, "det"),
            token(4, "cat", "cat", 2, "obj"),
        ],
    }
}

pub const UD_RELATIONS: &[&str] = &[
    "nsubj", "obj", "iobj", "obl", "nmod", "amod", "advmod", "det", "case", "mark", "xcomp",
    "ccomp", "acl", "advcl", "conj", "cc", "cop", "aux", "compound", "flat", "nummod", "appos",
    "punct",
];

const VOCAB: &[&str] = &[
    "the", "a", "cat", "dog", "bird", "tree", "house", "book", "man", "woman", "child", "saw",
    "liked", "found", "gave", "sent", "old", "young", "small", "red", "quickly", "slowly", "on",
    "in", "under", "with", "to", "from", "and", "or", "that", "which", "very", "quite", "letter",
    "garden", "city", "river", "friend", "teacher",
];

fn fill_words(rng: &mut impl Rng, tokens: &mut [Token]) {
    for tok in tokens.iter_mut() {
        let form = VOCAB[rng.random_range(0..VOCAB.len())];
        tok.form = form.to_string();
        tok.lemma = form.to_string();
    }
}

/// Uniform random projective tree over n tokens: heads are assigned by
/// recursive span splitting, so every subtree covers a contiguous span.
pub fn random_projective_tree(rng: &mut impl Rng, n: usize, id: &str) -> DepTree {
    assert!(n >= 1);
    let mut heads = vec![0usize; n + 1];
    let root = split_span(rng, 1, n, &mut heads);
    heads[root] = 0;
    finish_tree(rng, heads, root, n, id)
}

fn split_span(rng: &mut impl Rng, lo: usize, hi: usize, heads: &mut [usize]) -> usize {
    let head = rng.random_range(lo..=hi);
    // left chunks, innermost first
    let mut end = head - 1;
    while end >= lo {
        let start = rng.random_range(lo..=end);
        let sub = split_span(rng, start, end, heads);
        heads[sub] = head;
        if start == lo {
            break;
        }
        end = start - 1;
    }
    let mut start = head + 1;
    while start <= hi {
        let end = rng.random_range(start..=hi);
        let sub = split_span(rng, start, end, heads);
        heads[sub] = head;
        start = end + 1;
    }
    head
}

/// Uniform random attachment tree; frequently non-projective for n >= 4.
pub fn random_tree(rng: &mut impl Rng, n: usize, id: &str) -> DepTree {
    assert!(n >= 1);
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut heads = vec![0usize; n + 1];
    let root = order[0];
    for i in 1..n {
        heads[order[i]] = order[rng.random_range(0..i)];
    }
    finish_tree(rng, heads, root, n, id)
}

fn finish_tree(rng: &mut impl Rng, heads: Vec<usize>, root: usize, n: usize, id: &str) -> DepTree {
    let mut tokens: Vec<Token> = (1..=n)
        .map(|i| {
            let deprel = if i == root {
                "root".to_string()
            } else {
                UD_RELATIONS[rng.random_range(0..UD_RELATIONS.len())].to_string()
            };
            token(i, "w", "w", heads[i], &deprel)
        })
        .collect();
    fill_words(rng, &mut tokens);
    DepTree {
        sentence_id: id.to_string(),
        tokens,
    }
}

/// A deterministic synthetic treebank standing in for a UD sample: mostly
/// projective trees with a non-projective share mixed in.
pub fn synthetic_corpus(seed: u64, sentences: usize, max_len: usize) -> Vec<DepTree> {
    let mut rng = rng(seed);
    (0..sentences)
        .map(|i| {
            let n = rng.random_range(1..=max_len);
            let id = format!("synth-{i}");
            if rng.random_range(0..10) < 8 {
                random_projective_tree(&mut rng, n, &id)
            } else {
                random_tree(&mut rng, n, &id)
            }
        })
        .collect()
}

/// Projectivity oracle: pairwise interleaving check over all arcs,
/// including the arc from the virtual root position 0.
pub fn projective_by_crossing_oracle(tree: &DepTree) -> bool {
    let arcs: Vec<(usize, usize)> = tree
        .tokens
        .iter()
        .map(|t| (t.head.min(t.index), t.head.max(t.index)))
        .collect();
    for (i, a) in arcs.iter().enumerate() {
        for b in arcs.iter().skip(i + 1) {
            let interleaved =
                (a.0 < b.0 && b.0 < a.1 && a.1 < b.1) || (b.0 < a.0 && a.0 < b.1 && b.1 < a.1);
            if interleaved {
                return false;
            }
        }
    }
    true
}

/// Independent recursive reference for the dependency-tree linearization.
pub fn linearize_reference(tree: &DepTree) -> String {
    fn render(tree: &DepTree, index: usize) -> String {
        let dependents: Vec<&Token> = tree.tokens.iter().filter(|t| t.head == index).collect();
        let form = &tree.tokens[index - 1].form;
        if dependents.is_empty() {
            return form.clone();
        }
        let mut parts = vec!["(".to_string(), form.clone()];
        for dep in dependents {
            parts.push(dep.deprel.clone());
            parts.push(render(tree, dep.index));
        }
        parts.push(")".to_string());
        parts.join(" ")
    }
    let root = tree.tokens.iter().find(|t| t.head == 0).unwrap().index;
    render(tree, root)
}

/// Brute-force chain oracle: walks every maximal chain edge by edge,
/// recomputing the deepest continuation by recursive descent at each step.
pub fn chain_histogram_reference(tree: &DepTree, relation: &str) -> BTreeMap<usize, u64> {
    let r_children = |node: usize| -> Vec<usize> {
        tree.tokens
            .iter()
            .filter(|t| t.head == node && t.deprel == relation)
            .map(|t| t.index)
            .collect()
    };
    fn descent(tree: &DepTree, relation: &str, node: usize) -> usize {
        tree.tokens
            .iter()
            .filter(|t| t.head == node && t.deprel == relation)
            .map(|t| 1 + descent(tree, relation, t.index))
            .max()
            .unwrap_or(0)
    }
    let continuation = |node: usize| -> Option<usize> {
        r_children(node)
            .into_iter()
            .max_by_key(|&c| (descent(tree, relation, c), std::cmp::Reverse(c)))
    };

    let mut counts = BTreeMap::new();
    for tok in &tree.tokens {
        if tok.deprel != relation {
            continue;
        }
        let head_is_r_dependent = tok.head >= 1 && tree.tokens[tok.head - 1].deprel == relation;
        let starts_chain = if head_is_r_dependent {
            continuation(tok.head) != Some(tok.index)
        } else {
            true
        };
        if !starts_chain {
            continue;
        }
        // walk the chain down, one edge at a time
        let mut depth = 1;
        let mut at = tok.index;
        while let Some(next) = continuation(at) {
            depth += 1;
            at = next;
        }
        *counts.entry(depth).or_insert(0) += 1;
    }
    counts
}
