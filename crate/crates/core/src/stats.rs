//! Treebank statistics: recursion-depth histograms, relation frequencies
//! and the projectivity rate.
//!
//! Recursion depth is measured over maximal chains of equally-labeled
//! edges: a chain follows an edge with relation R into a dependent that
//! itself governs another R edge, and so on. Every R edge belongs to
//! exactly one maximal chain. Where a token has several R dependents the
//! chain continues into the dependent with the deepest R descent (ties go
//! to the leftmost); the remaining dependents start chains of their own.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use crate::treebank::{is_projective, DepTree, InvalidTree};

/// Chain counts per depth for one relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthHistogram {
    pub relation: String,
    /// depth (number of chained edges) -> number of maximal chains
    pub counts: BTreeMap<usize, u64>,
}

impl DepthHistogram {
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of edges covered, i.e. sum of depth * count.
    pub fn edge_count(&self) -> u64 {
        self.counts.iter().map(|(d, c)| *d as u64 * c).sum()
    }
}

/// Count maximal chains of `relation` edges by depth over the corpus.
pub fn recursion_depth_histogram(corpus: &[DepTree], relation: &str) -> DepthHistogram {
    let mut counts = BTreeMap::new();
    for tree in corpus {
        tree_chain_depths(tree, relation, &mut counts);
    }
    DepthHistogram {
        relation: relation.to_string(),
        counts,
    }
}

fn tree_chain_depths(tree: &DepTree, relation: &str, counts: &mut BTreeMap<usize, u64>) {
    let n = tree.tokens.len();
    // r_children[h] = dependents of h attached with `relation`, in surface
    // order; index 0 is the virtual root.
    let mut r_children: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    let mut is_r_dependent = vec![false; n + 1];
    for tok in &tree.tokens {
        if tok.deprel == relation && tok.head <= n {
            r_children[tok.head].push(tok.index);
            is_r_dependent[tok.index] = true;
        }
    }

    // descent[t] = length of the longest chain continuation below t
    let mut descent = vec![0usize; n + 1];
    let mut order: Vec<usize> = (1..=n).collect();
    // children have larger descent-recursion depth; process bottom-up by
    // iterating until settled (trees are shallow; a reverse topological
    // pass over head links does it in one sweep)
    order.sort_by_key(|&t| std::cmp::Reverse(depth_from_root(tree, t)));
    for t in order {
        descent[t] = r_children[t]
            .iter()
            .map(|&c| 1 + descent[c])
            .max()
            .unwrap_or(0);
    }

    for head in 0..=n {
        if r_children[head].is_empty() {
            continue;
        }
        // the continuation child of a chain arriving at `head`, if any
        let continuation = if head > 0 && is_r_dependent[head] {
            r_children[head]
                .iter()
                .copied()
                .max_by_key(|&c| (descent[c], std::cmp::Reverse(c)))
        } else {
            None
        };
        for &child in &r_children[head] {
            if Some(child) == continuation {
                continue;
            }
            *counts.entry(1 + descent[child]).or_insert(0) += 1;
        }
    }
}

fn depth_from_root(tree: &DepTree, mut token: usize) -> usize {
    let n = tree.tokens.len();
    let mut depth = 0;
    let mut steps = 0;
    while token != 0 && token <= n && steps <= n {
        token = tree.tokens[token - 1].head;
        depth += 1;
        steps += 1;
    }
    depth
}

/// Edge counts per relation label over the corpus.
pub fn relation_frequencies(corpus: &[DepTree]) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for tree in corpus {
        for tok in &tree.tokens {
            *counts.entry(tok.deprel.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// Share of projective trees, or `None` for an empty corpus.
pub fn projectivity_rate(corpus: &[DepTree]) -> Result<Option<f64>, InvalidTree> {
    if corpus.is_empty() {
        return Ok(None);
    }
    let mut projective = 0usize;
    for tree in corpus {
        if is_projective(tree)? {
            projective += 1;
        }
    }
    Ok(Some(projective as f64 / corpus.len() as f64))
}

/// Corpus-level summary for the JSON report.
#[derive(Debug, Serialize)]
pub struct CorpusSummary {
    pub sentences: usize,
    /// `null` when the corpus is empty.
    pub projectivity_rate: Option<f64>,
    pub relation_frequencies: BTreeMap<String, u64>,
}

pub fn summarize(corpus: &[DepTree]) -> Result<CorpusSummary, InvalidTree> {
    Ok(CorpusSummary {
        sentences: corpus.len(),
        projectivity_rate: projectivity_rate(corpus)?,
        relation_frequencies: relation_frequencies(corpus),
    })
}

/// Write histograms as `relation,depth,count` CSV.
pub fn write_depth_csv<W: Write>(histograms: &[DepthHistogram], mut writer: W) -> io::Result<()> {
    writeln!(writer, "relation,depth,count")?;
    for hist in histograms {
        for (depth, count) in &hist.counts {
            writeln!(writer, "{},{},{}", hist.relation, depth, count)?;
        }
    }
    Ok(())
}
