//! IBM Model 1 word alignment, trained with EM, plus posterior alignment
//! matrices.
//!
//! The model has no NULL source word: translation probabilities are
//! initialized uniformly over the target words co-occurring with each
//! source word and renormalized per source word after every iteration.

use std::collections::BTreeMap;

use thiserror::Error;

/// A sentence pair: natural-language tokens on the source side, the
/// tokenized logical form (or any target string) on the target side.
pub type SentencePair = (Vec<String>, Vec<String>);

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("pair {index}: empty {side} side")]
    EmptySide { index: usize, side: &'static str },
    #[error("iterations must be >= 1")]
    NoIterations,
}

/// Translation probability table t(target | source).
///
/// Ordered maps keep the EM accumulation order fixed, so training is
/// bit-reproducible across runs.
#[derive(Debug, Clone)]
pub struct AlignmentModel {
    table: BTreeMap<String, BTreeMap<String, f64>>,
}

impl AlignmentModel {
    /// t(target | source); 0 for unseen combinations.
    pub fn probability(&self, source: &str, target: &str) -> f64 {
        self.table
            .get(source)
            .and_then(|row| row.get(target))
            .copied()
            .unwrap_or(0.0)
    }

    /// The distribution over targets for one source word.
    pub fn distribution(&self, source: &str) -> Option<&BTreeMap<String, f64>> {
        self.table.get(source)
    }

    pub fn source_vocab(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(|s| s.as_str())
    }

    /// Log-likelihood of a corpus under the model, with the uniform
    /// alignment prior 1/n per target token included.
    pub fn corpus_log_likelihood(&self, pairs: &[SentencePair]) -> f64 {
        let mut ll = 0.0;
        for (src, tgt) in pairs {
            let n = src.len() as f64;
            for f in tgt {
                let total: f64 = src.iter().map(|e| self.probability(e, f)).sum();
                ll += (total / n).ln();
            }
        }
        ll
    }
}

/// Result of EM training: the model and the corpus log-likelihood after
/// each iteration.
#[derive(Debug)]
pub struct TrainResult {
    pub model: AlignmentModel,
    pub log_likelihoods: Vec<f64>,
}

/// Train IBM Model 1 with `iterations` rounds of EM.
pub fn train_ibm1(pairs: &[SentencePair], iterations: usize) -> Result<TrainResult, AlignError> {
    if iterations < 1 {
        return Err(AlignError::NoIterations);
    }
    if pairs.is_empty() {
        return Err(AlignError::EmptyCorpus);
    }
    for (index, (src, tgt)) in pairs.iter().enumerate() {
        if src.is_empty() {
            return Err(AlignError::EmptySide {
                index,
                side: "source",
            });
        }
        if tgt.is_empty() {
            return Err(AlignError::EmptySide {
                index,
                side: "target",
            });
        }
    }

    // uniform initialization over the co-occurring target vocabulary
    let mut table: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (src, tgt) in pairs {
        for e in src {
            let row = table.entry(e.clone()).or_default();
            for f in tgt {
                row.entry(f.clone()).or_insert(0.0);
            }
        }
    }
    for row in table.values_mut() {
        let uniform = 1.0 / row.len() as f64;
        for p in row.values_mut() {
            *p = uniform;
        }
    }
    let mut model = AlignmentModel { table };

    let mut log_likelihoods = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let mut counts: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (src, tgt) in pairs {
            for f in tgt {
                let denom: f64 = src.iter().map(|e| model.probability(e, f)).sum();
                if denom <= 0.0 {
                    continue;
                }
                for e in src {
                    let p = model.probability(e, f);
                    if p > 0.0 {
                        *counts
                            .entry(e.clone())
                            .or_default()
                            .entry(f.clone())
                            .or_insert(0.0) += p / denom;
                    }
                }
            }
        }
        for (e, row) in &mut model.table {
            let Some(count_row) = counts.get(e) else {
                continue;
            };
            let total: f64 = count_row.values().sum();
            if total <= 0.0 {
                continue;
            }
            for (f, p) in row.iter_mut() {
                *p = count_row.get(f).copied().unwrap_or(0.0) / total;
            }
        }
        log_likelihoods.push(model.corpus_log_likelihood(pairs));
    }

    Ok(TrainResult {
        model,
        log_likelihoods,
    })
}

/// Posterior alignment matrix for one pair: entry `[i][j]` is the
/// probability that source position i generated target position j. Every
/// column sums to 1; a target word without any model mass gets a uniform
/// column.
pub fn posterior_alignments(
    model: &AlignmentModel,
    source: &[String],
    target: &[String],
) -> Vec<Vec<f64>> {
    let n = source.len();
    let mut matrix = vec![vec![0.0; target.len()]; n];
    for (j, f) in target.iter().enumerate() {
        let weights: Vec<f64> = source.iter().map(|e| model.probability(e, f)).collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            for (i, w) in weights.iter().enumerate() {
                matrix[i][j] = w / total;
            }
        } else {
            for row in matrix.iter_mut() {
                row[j] = 1.0 / n as f64;
            }
        }
    }
    matrix
}
