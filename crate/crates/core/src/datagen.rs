//! Deterministic pre-training dataset generation.
//!
//! For each sentence we sample a fixed number of random transformations and
//! evaluate them. Every sentence gets its own random stream, derived from
//! the corpus seed and the sentence's ordinal, so the emitted dataset is a
//! pure function of (corpus, config) no matter how many workers run the
//! generation or in which order sentences finish.
//!
//! Sampling per sentence: at least one relation that actually occurs in the
//! sentence is always included (when any exists), the rest of the budget of
//! `max_relations` may be spent on relations absent from the sentence, and
//! each chosen relation gets an operation drawn uniformly from the
//! configured inventory. Everything that is not chosen stays at the
//! implicit `concat`.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transform::{apply_transformation, EdgewiseTransform, Operation};
use crate::treebank::{is_projective, require_valid, validate_tree, DepTree, InvalidTree};

/// How instance lengths are measured against the configured limits.
#[derive(Debug, Clone, Default)]
pub enum TokenCounter {
    /// Count whitespace-separated tokens.
    #[default]
    Whitespace,
    /// Sum per-word counts from an external table (e.g. precomputed subword
    /// counts); words missing from the table count as 1.
    SubwordTable(HashMap<String, usize>),
}

impl TokenCounter {
    pub fn count(&self, text: &str) -> usize {
        match self {
            TokenCounter::Whitespace => text.split_whitespace().count(),
            TokenCounter::SubwordTable(table) => text
                .split_whitespace()
                .map(|w| table.get(w).copied().unwrap_or(1))
                .sum(),
        }
    }

    /// Load a `word<TAB>count` table.
    pub fn from_tsv<R: BufRead>(reader: R) -> io::Result<Self> {
        let mut table = HashMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (word, count) = line.split_once('\t').ok_or_else(|| {
                io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("line {}: expected word<TAB>count", lineno + 1),
                )
            })?;
            let count: usize = count.trim().parse().map_err(|_| {
                io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("line {}: bad count `{}`", lineno + 1, count),
                )
            })?;
            table.insert(word.to_string(), count);
        }
        Ok(TokenCounter::SubwordTable(table))
    }
}

/// Configuration for dataset generation.
#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Upper bound on the number of (relation, operation) pairs per prefix.
    pub max_relations: usize,
    /// Number of sampled transformations per sentence.
    pub transforms_per_sentence: usize,
    /// Sentences longer than this are skipped.
    pub max_input_tokens: usize,
    /// Instances with longer outputs are dropped (not resampled).
    pub max_output_tokens: usize,
    /// Operations available to the sampler.
    pub operation_inventory: Vec<Operation>,
    /// Relations available to the sampler; `None` means every relation
    /// observed in the corpus.
    pub relation_inventory: Option<BTreeSet<String>>,
    /// Extra relations unioned into the inventory (e.g. read from a file).
    pub extra_relations: BTreeSet<String>,
    pub seed: u64,
    pub token_counter: TokenCounter,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_relations: 20,
            transforms_per_sentence: 2,
            max_input_tokens: 90,
            max_output_tokens: 180,
            operation_inventory: Operation::ALL.to_vec(),
            relation_inventory: None,
            extra_relations: BTreeSet::new(),
            seed: 0,
            token_counter: TokenCounter::Whitespace,
        }
    }
}

impl GenConfig {
    fn validate(&self) -> Result<(), GenError> {
        if self.max_relations < 1 {
            return Err(GenError::Config("max_relations must be >= 1".into()));
        }
        if self.transforms_per_sentence < 1 {
            return Err(GenError::Config(
                "transforms_per_sentence must be >= 1".into(),
            ));
        }
        if self.max_input_tokens < 1 || self.max_output_tokens < 1 {
            return Err(GenError::Config("length limits must be >= 1".into()));
        }
        if self.operation_inventory.is_empty() {
            return Err(GenError::Config("operation inventory is empty".into()));
        }
        Ok(())
    }

    /// The relation inventory used for sampling over `corpus`: the
    /// configured set, or every relation observed on token-to-token edges
    /// in the corpus, plus any extra relations. The root attachment is not
    /// an edge of the unfolded tree, so its label is not collected.
    pub fn resolve_inventory(&self, corpus: &[DepTree]) -> BTreeSet<String> {
        let mut inventory = match &self.relation_inventory {
            Some(set) => set.clone(),
            None => corpus
                .iter()
                .flat_map(|t| {
                    t.tokens
                        .iter()
                        .filter(|tok| tok.head != 0)
                        .map(|tok| tok.deprel.clone())
                })
                .collect(),
        };
        inventory.extend(self.extra_relations.iter().cloned());
        inventory
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    InvalidTree(#[from] InvalidTree),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// The transformation description attached to an instance: the explicit
/// edgewise map in step mode, or the single shared operation in simple
/// mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Prefix {
    Edgewise(EdgewiseTransform),
    SingleOp(Operation),
}

impl Prefix {
    /// Number of prefix tokens.
    pub fn len(&self) -> usize {
        match self {
            Prefix::Edgewise(t) => t.len(),
            Prefix::SingleOp(_) => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

// JSON encoding: an edgewise prefix is a list of [relation, operation]
// pairs; a simple-mode prefix is a single-element list [operation].
impl Serialize for Prefix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Prefix::Edgewise(t) => {
                let pairs: Vec<[&str; 2]> = t
                    .pairs()
                    .iter()
                    .map(|(rel, op)| [rel.as_str(), op.name()])
                    .collect();
                pairs.serialize(serializer)
            }
            Prefix::SingleOp(op) => vec![[op.name()]].serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for Prefix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: Vec<Vec<String>> = Vec::deserialize(deserializer)?;
        if raw.len() == 1 && raw[0].len() == 1 {
            let op = raw[0][0].parse::<Operation>().map_err(D::Error::custom)?;
            return Ok(Prefix::SingleOp(op));
        }
        let mut pairs = Vec::with_capacity(raw.len());
        for entry in raw {
            if entry.len() != 2 {
                return Err(D::Error::custom(format!(
                    "prefix entry must be [relation, operation], got {} elements",
                    entry.len()
                )));
            }
            let op = entry[1].parse::<Operation>().map_err(D::Error::custom)?;
            pairs.push((entry[0].clone(), op));
        }
        EdgewiseTransform::from_pairs(pairs)
            .map(Prefix::Edgewise)
            .map_err(D::Error::custom)
    }
}

/// Which pipeline produced an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Step,
    Simple,
    DepParse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub sent_id: String,
    pub mode: Mode,
    pub projective: bool,
}

/// One pre-training instance: the transformation description, the input
/// sentence, and the transformation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInstance {
    pub prefix: Prefix,
    pub input: Vec<String>,
    pub output: String,
    pub meta: InstanceMeta,
}

/// Generation output plus skip accounting.
#[derive(Debug, Default)]
pub struct GenReport {
    pub instances: Vec<DatasetInstance>,
    pub skipped_invalid: usize,
    pub skipped_long_input: usize,
    pub dropped_long_output: usize,
}

/// Deterministic random stream for the sentence at `ordinal`.
pub fn sentence_rng(seed: u64, ordinal: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(ordinal);
    rng
}

/// Sample a random edgewise transformation for `tree`.
///
/// Let P be the distinct relations of the sentence that are in the
/// inventory. When P is non-empty, a uniform 1..=min(|P|, max_relations)
/// of them are chosen; the remaining budget is filled with a uniform
/// 0..=budget count of relations absent from the sentence. Pair order is
/// sampling order, present relations first.
pub fn sample_transformation<R: Rng>(
    tree: &DepTree,
    rng: &mut R,
    cfg: &GenConfig,
) -> Result<EdgewiseTransform, GenError> {
    cfg.validate()?;
    // extra_relations are folded in by resolve_inventory; here the
    // configured set is used as-is
    let inventory = cfg.relation_inventory.as_ref().ok_or_else(|| {
        GenError::Config("relation inventory not resolved; call resolve_inventory first".into())
    })?;
    if inventory.is_empty() {
        return Err(GenError::Config("relation inventory is empty".into()));
    }

    // only token-to-token edges count as present; the root attachment
    // never becomes a node of the unfolded tree
    let present_set: BTreeSet<&str> = tree
        .tokens
        .iter()
        .filter(|t| t.head != 0)
        .map(|t| t.deprel.as_str())
        .filter(|r| inventory.contains(*r))
        .collect();
    let present: Vec<&str> = present_set.iter().copied().collect();
    let absent: Vec<&str> = inventory
        .iter()
        .map(|s| s.as_str())
        .filter(|r| !present_set.contains(*r))
        .collect();

    let k_present = if present.is_empty() {
        0
    } else {
        rng.random_range(1..=present.len().min(cfg.max_relations))
    };
    let absent_budget = (cfg.max_relations - k_present).min(absent.len());
    let k_absent = rng.random_range(0..=absent_budget);

    let mut pairs = Vec::with_capacity(k_present + k_absent);
    for idx in sample_indices(rng, present.len(), k_present) {
        pairs.push(present[idx].to_string());
    }
    for idx in sample_indices(rng, absent.len(), k_absent) {
        pairs.push(absent[idx].to_string());
    }
    let ops = &cfg.operation_inventory;
    let pairs = pairs
        .into_iter()
        .map(|rel| (rel, ops[rng.random_range(0..ops.len())]))
        .collect();
    Ok(EdgewiseTransform::from_pairs(pairs).expect("sampled relations are distinct"))
}

enum SentenceOutcome {
    Invalid,
    TooLong,
    Emitted(Vec<DatasetInstance>, usize),
}

fn run_sentences<F>(corpus: &[DepTree], per_sentence: F) -> GenReport
where
    F: Fn(usize, &DepTree) -> SentenceOutcome + Sync,
{
    let outcomes: Vec<SentenceOutcome> = corpus
        .par_iter()
        .enumerate()
        .map(|(ordinal, tree)| per_sentence(ordinal, tree))
        .collect();

    let mut report = GenReport::default();
    for outcome in outcomes {
        match outcome {
            SentenceOutcome::Invalid => report.skipped_invalid += 1,
            SentenceOutcome::TooLong => report.skipped_long_input += 1,
            SentenceOutcome::Emitted(instances, dropped) => {
                report.instances.extend(instances);
                report.dropped_long_output += dropped;
            }
        }
    }
    report
}

/// Generate the step-mode dataset: per sentence, `transforms_per_sentence`
/// sampled transformations evaluated to output strings.
pub fn generate_dataset(corpus: &[DepTree], cfg: &GenConfig) -> Result<GenReport, GenError> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Ok(GenReport::default());
    }
    let mut cfg = cfg.clone();
    let inventory = cfg.resolve_inventory(corpus);
    if inventory.is_empty() {
        return Err(GenError::Config(
            "relation inventory is empty (no relations in corpus?)".into(),
        ));
    }
    cfg.relation_inventory = Some(inventory);

    Ok(run_sentences(corpus, |ordinal, tree| {
        if !validate_tree(tree).ok() {
            return SentenceOutcome::Invalid;
        }
        if cfg.token_counter.count(&tree.text()) > cfg.max_input_tokens {
            return SentenceOutcome::TooLong;
        }
        let projective = is_projective(tree).expect("tree was validated");
        let mut rng = sentence_rng(cfg.seed, ordinal as u64);
        let mut instances = Vec::with_capacity(cfg.transforms_per_sentence);
        let mut dropped = 0;
        for _ in 0..cfg.transforms_per_sentence {
            let transform =
                sample_transformation(tree, &mut rng, &cfg).expect("inventory is resolved");
            let output = apply_transformation(tree, &transform).expect("tree was validated");
            if cfg.token_counter.count(&output) > cfg.max_output_tokens {
                dropped += 1;
                continue;
            }
            instances.push(DatasetInstance {
                prefix: Prefix::Edgewise(transform),
                input: tree.tokens.iter().map(|t| t.form.clone()).collect(),
                output,
                meta: InstanceMeta {
                    sent_id: tree.sentence_id.clone(),
                    mode: Mode::Step,
                    projective,
                },
            });
        }
        SentenceOutcome::Emitted(instances, dropped)
    }))
}

/// Generate the simple-mode dataset: one operation per instance, assigned
/// to every relation present in the sentence. `ignore-dep` is never used.
pub fn generate_simple(corpus: &[DepTree], cfg: &GenConfig) -> Result<GenReport, GenError> {
    cfg.validate()?;
    let ops: Vec<Operation> = cfg
        .operation_inventory
        .iter()
        .copied()
        .filter(|op| *op != Operation::IgnoreDep)
        .collect();
    if ops.is_empty() {
        return Err(GenError::Config(
            "operation inventory is empty after removing ignore-dep".into(),
        ));
    }

    Ok(run_sentences(corpus, |ordinal, tree| {
        if !validate_tree(tree).ok() {
            return SentenceOutcome::Invalid;
        }
        if cfg.token_counter.count(&tree.text()) > cfg.max_input_tokens {
            return SentenceOutcome::TooLong;
        }
        let projective = is_projective(tree).expect("tree was validated");
        let present: BTreeSet<&str> = tree
            .tokens
            .iter()
            .filter(|t| t.head != 0)
            .map(|t| t.deprel.as_str())
            .collect();
        let mut rng = sentence_rng(cfg.seed, ordinal as u64);
        let mut instances = Vec::with_capacity(cfg.transforms_per_sentence);
        let mut dropped = 0;
        for _ in 0..cfg.transforms_per_sentence {
            let op = ops[rng.random_range(0..ops.len())];
            let transform = EdgewiseTransform::from_pairs(
                present.iter().map(|rel| (rel.to_string(), op)).collect(),
            )
            .expect("present relations are distinct");
            let output = apply_transformation(tree, &transform).expect("tree was validated");
            if cfg.token_counter.count(&output) > cfg.max_output_tokens {
                dropped += 1;
                continue;
            }
            instances.push(DatasetInstance {
                prefix: Prefix::SingleOp(op),
                input: tree.tokens.iter().map(|t| t.form.clone()).collect(),
                output,
                meta: InstanceMeta {
                    sent_id: tree.sentence_id.clone(),
                    mode: Mode::Simple,
                    projective,
                },
            });
        }
        SentenceOutcome::Emitted(instances, dropped)
    }))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrefixError {
    #[error("relation `{0}` contains `=` or whitespace")]
    BadRelation(String),
    #[error("prefix token `{0}` is not of the form relation=operation")]
    BadToken(String),
    #[error("unknown operation in `{0}`")]
    BadOperation(String),
    #[error(transparent)]
    Transform(#[from] crate::transform::TransformError),
}

/// Render a transform as whitespace-separated `relation=operation` tokens.
pub fn serialize_prefix(transform: &EdgewiseTransform) -> Result<String, PrefixError> {
    let mut tokens = Vec::with_capacity(transform.len());
    for (rel, op) in transform.pairs() {
        if rel.contains('=') || rel.contains(char::is_whitespace) {
            return Err(PrefixError::BadRelation(rel.clone()));
        }
        tokens.push(format!("{rel}={op}"));
    }
    Ok(tokens.join(" "))
}

/// Inverse of [`serialize_prefix`]. Accepts commas as pair separators too,
/// which is the command-line form.
pub fn parse_prefix(text: &str) -> Result<EdgewiseTransform, PrefixError> {
    let mut pairs = Vec::new();
    for token in text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
    {
        let (rel, op) = token
            .split_once('=')
            .ok_or_else(|| PrefixError::BadToken(token.to_string()))?;
        if rel.is_empty() || op.contains('=') {
            return Err(PrefixError::BadToken(token.to_string()));
        }
        let op: Operation = op
            .parse()
            .map_err(|_| PrefixError::BadOperation(token.to_string()))?;
        pairs.push((rel.to_string(), op));
    }
    Ok(EdgewiseTransform::from_pairs(pairs)?)
}

/// Render a dependency tree as a parenthesized top-down structure, e.g.
/// `( saw nsubj Mary obj ( cat det a ) )`.
pub fn linearize_dep_tree(tree: &DepTree) -> Result<String, InvalidTree> {
    require_valid(tree)?;
    let root = tree
        .tokens
        .iter()
        .find(|t| t.head == 0)
        .expect("validated tree has a root")
        .index;
    let mut tokens = Vec::new();
    linearize_token(tree, root, &mut tokens);
    Ok(tokens.join(" "))
}

fn linearize_token(tree: &DepTree, index: usize, out: &mut Vec<String>) {
    let deps = tree.dependents(index);
    if deps.is_empty() {
        out.push(tree.token(index).form.clone());
        return;
    }
    out.push("(".into());
    out.push(tree.token(index).form.clone());
    for dep in deps {
        out.push(tree.token(dep).deprel.clone());
        linearize_token(tree, dep, out);
    }
    out.push(")".into());
}

/// Write instances as JSON Lines.
pub fn write_jsonl<W: Write>(instances: &[DatasetInstance], mut writer: W) -> io::Result<()> {
    for instance in instances {
        serde_json::to_writer(&mut writer, instance)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Read instances back from JSON Lines.
pub fn read_jsonl<R: BufRead>(reader: R) -> io::Result<Vec<DatasetInstance>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Write instances as `prefix<TAB>input<TAB>output` lines.
pub fn write_tsv<W: Write>(instances: &[DatasetInstance], mut writer: W) -> Result<(), GenError> {
    for instance in instances {
        let prefix = match &instance.prefix {
            Prefix::Edgewise(t) => {
                serialize_prefix(t).map_err(|e| GenError::Config(e.to_string()))?
            }
            Prefix::SingleOp(op) => op.name().to_string(),
        };
        writeln!(
            writer,
            "{}\t{}\t{}",
            prefix,
            instance.input.join(" "),
            instance.output
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::Token;

    fn tok(index: usize, form: &str, head: usize, deprel: &str) -> Token {
        Token {
            index,
            form: form.into(),
            lemma: form.to_lowercase(),
            upos: None,
            head,
            deprel: deprel.into(),
        }
    }

    fn t_cat() -> DepTree {
        DepTree {
            sentence_id: "t_cat".into(),
            tokens: vec![
                tok(1, "Mary", 2, "nsubj"),
                tok(2, "saw", 0, "root"),
                tok(3, "a", 4, "det"),
                tok(4, "cat", 2, "obj"),
            ],
        }
    }

    fn cfg_with_inventory(extra: &[&str]) -> GenConfig {
        let mut inventory: BTreeSet<String> = ["nsubj", "obj", "det", "root"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        inventory.extend(extra.iter().map(|s| s.to_string()));
        GenConfig {
            relation_inventory: Some(inventory),
            ..GenConfig::default()
        }
    }

    #[test]
    fn sampled_transform_respects_bounds() {
        let cfg = cfg_with_inventory(&["amod", "xcomp", "advmod"]);
        let tree = t_cat();
        let present: BTreeSet<&str> = ["nsubj", "obj", "det"].into_iter().collect();
        for ordinal in 0..1000 {
            let mut rng = sentence_rng(7, ordinal);
            let t = sample_transformation(&tree, &mut rng, &cfg).unwrap();
            assert!(t.len() <= cfg.max_relations);
            assert!(!t.is_empty());
            // at least one present relation, and it comes first
            assert!(present.contains(t.pairs()[0].0.as_str()));
        }
    }

    #[test]
    fn single_token_tree_samples_only_absent_relations() {
        // the root attachment is not a token-to-token edge, so nothing is
        // present, no pair is forced, and the whole budget goes to absent
        // relations
        let tree = DepTree {
            sentence_id: "one".into(),
            tokens: vec![tok(1, "Hi", 0, "root")],
        };
        let cfg = GenConfig {
            relation_inventory: Some(["amod".to_string(), "xcomp".to_string()].into()),
            ..GenConfig::default()
        };
        let mut saw_empty = false;
        for ordinal in 0..100 {
            let mut rng = sentence_rng(5, ordinal);
            let t = sample_transformation(&tree, &mut rng, &cfg).unwrap();
            saw_empty |= t.is_empty();
            for (rel, _) in t.pairs() {
                assert!(rel == "amod" || rel == "xcomp");
            }
        }
        assert!(saw_empty, "with nothing present the transform may be empty");
    }

    #[test]
    fn sampling_on_sentence_without_known_relations() {
        // inventory disjoint from the sentence: k_present is 0, only absent
        // relations can be drawn
        let cfg = GenConfig {
            relation_inventory: Some(["amod".to_string(), "xcomp".to_string()].into()),
            ..GenConfig::default()
        };
        let tree = t_cat();
        let mut rng = sentence_rng(1, 0);
        for _ in 0..100 {
            let t = sample_transformation(&tree, &mut rng, &cfg).unwrap();
            for (rel, _) in t.pairs() {
                assert!(rel == "amod" || rel == "xcomp");
            }
        }
    }

    #[test]
    fn max_relations_one_forces_single_present_pair() {
        let cfg = GenConfig {
            max_relations: 1,
            ..cfg_with_inventory(&["amod"])
        };
        let tree = t_cat();
        let present: BTreeSet<&str> = ["nsubj", "obj", "det"].into_iter().collect();
        for ordinal in 0..200 {
            let mut rng = sentence_rng(3, ordinal);
            let t = sample_transformation(&tree, &mut rng, &cfg).unwrap();
            assert_eq!(t.len(), 1);
            assert!(present.contains(t.pairs()[0].0.as_str()));
        }
    }

    #[test]
    fn empty_inventory_is_config_error() {
        let cfg = GenConfig {
            relation_inventory: Some(BTreeSet::new()),
            ..GenConfig::default()
        };
        let mut rng = sentence_rng(0, 0);
        assert!(matches!(
            sample_transformation(&t_cat(), &mut rng, &cfg),
            Err(GenError::Config(_))
        ));
    }

    #[test]
    fn generate_emits_two_instances_per_sentence() {
        let corpus = vec![t_cat()];
        let report = generate_dataset(&corpus, &GenConfig::default()).unwrap();
        assert_eq!(report.instances.len(), 2);
        assert_eq!(report.skipped_invalid, 0);
        for inst in &report.instances {
            assert_eq!(inst.meta.mode, Mode::Step);
            assert!(inst.meta.projective);
            assert_eq!(inst.input, vec!["Mary", "saw", "a", "cat"]);
            match &inst.prefix {
                Prefix::Edgewise(t) => {
                    assert_eq!(apply_transformation(&corpus[0], t).unwrap(), inst.output)
                }
                _ => panic!("step mode emits edgewise prefixes"),
            }
        }
    }

    #[test]
    fn generate_empty_corpus_is_empty_stream() {
        let report = generate_dataset(&[], &GenConfig::default()).unwrap();
        assert!(report.instances.is_empty());
    }

    #[test]
    fn generate_same_seed_is_identical() {
        let corpus = vec![t_cat(), t_cat(), t_cat()];
        let cfg = GenConfig {
            seed: 42,
            ..GenConfig::default()
        };
        let a = generate_dataset(&corpus, &cfg).unwrap();
        let b = generate_dataset(&corpus, &cfg).unwrap();
        assert_eq!(a.instances, b.instances);
    }

    #[test]
    fn input_length_filter_skips_sentence() {
        let cfg = GenConfig {
            max_input_tokens: 3,
            ..GenConfig::default()
        };
        let report = generate_dataset(&[t_cat()], &cfg).unwrap();
        assert!(report.instances.is_empty());
        assert_eq!(report.skipped_long_input, 1);
    }

    #[test]
    fn output_length_filter_drops_instances() {
        let cfg = GenConfig {
            max_output_tokens: 1,
            ..GenConfig::default()
        };
        let report = generate_dataset(&[t_cat()], &cfg).unwrap();
        assert!(report.instances.is_empty());
        assert_eq!(report.dropped_long_output, 2);
    }

    #[test]
    fn invalid_sentence_is_skipped_and_counted() {
        let mut bad = t_cat();
        bad.tokens[1].head = 2; // self-head, no root
        let corpus = vec![t_cat(), bad];
        let report = generate_dataset(&corpus, &GenConfig::default()).unwrap();
        assert_eq!(report.skipped_invalid, 1);
        assert_eq!(report.instances.len(), 2);
    }

    #[test]
    fn simple_mode_matches_expanded_transform() {
        let corpus = vec![t_cat()];
        let cfg = GenConfig {
            seed: 9,
            ..GenConfig::default()
        };
        let report = generate_simple(&corpus, &cfg).unwrap();
        assert_eq!(report.instances.len(), 2);
        for inst in &report.instances {
            let op = match inst.prefix {
                Prefix::SingleOp(op) => op,
                _ => panic!("simple mode emits single-op prefixes"),
            };
            assert_ne!(op, Operation::IgnoreDep);
            let expanded = EdgewiseTransform::from_pairs(
                ["nsubj", "obj", "det"]
                    .iter()
                    .map(|r| (r.to_string(), op))
                    .collect(),
            )
            .unwrap();
            assert_eq!(
                apply_transformation(&corpus[0], &expanded).unwrap(),
                inst.output
            );
        }
    }

    #[test]
    fn simple_mode_never_samples_ignore_dep() {
        let corpus: Vec<DepTree> = (0..500).map(|_| t_cat()).collect();
        let cfg = GenConfig {
            transforms_per_sentence: 10,
            ..GenConfig::default()
        };
        let report = generate_simple(&corpus, &cfg).unwrap();
        assert_eq!(report.instances.len(), 5000);
        for inst in &report.instances {
            assert!(!matches!(
                inst.prefix,
                Prefix::SingleOp(Operation::IgnoreDep)
            ));
        }
    }

    #[test]
    fn prefix_serialization_round_trip() {
        let t = EdgewiseTransform::from_pairs(vec![
            ("obj".into(), Operation::Rev),
            ("nsubj".into(), Operation::Bracket),
        ])
        .unwrap();
        let s = serialize_prefix(&t).unwrap();
        assert_eq!(s, "obj=rev nsubj=bracket");
        assert_eq!(parse_prefix(&s).unwrap(), t);
        assert_eq!(parse_prefix("obj=rev,nsubj=bracket").unwrap(), t);
        assert_eq!(parse_prefix("").unwrap(), EdgewiseTransform::empty());
    }

    #[test]
    fn prefix_rejects_bad_relations() {
        let t = EdgewiseTransform::from_pairs(vec![("a=b".into(), Operation::Rev)]).unwrap();
        assert!(matches!(
            serialize_prefix(&t),
            Err(PrefixError::BadRelation(_))
        ));
        assert!(parse_prefix("obj").is_err());
        assert!(parse_prefix("obj=flip").is_err());
    }

    #[test]
    fn linearize_t_cat() {
        assert_eq!(
            linearize_dep_tree(&t_cat()).unwrap(),
            "( saw nsubj Mary obj ( cat det a ) )"
        );
    }

    #[test]
    fn linearize_single_token() {
        let tree = DepTree {
            sentence_id: "one".into(),
            tokens: vec![tok(1, "Hi", 0, "root")],
        };
        assert_eq!(linearize_dep_tree(&tree).unwrap(), "Hi");
    }

    #[test]
    fn jsonl_round_trip() {
        let corpus = vec![t_cat()];
        let report = generate_dataset(&corpus, &GenConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&report.instances, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first_line = text.lines().next().unwrap();
        let value: serde_json::Value = serde_json::from_str(first_line).unwrap();
        // normative field names
        assert!(value.get("prefix").unwrap().is_array());
        assert!(value.get("input").unwrap().is_array());
        assert!(value.get("output").unwrap().is_string());
        let meta = value.get("meta").unwrap();
        assert_eq!(meta.get("mode").unwrap(), "step");
        assert_eq!(meta.get("sent_id").unwrap(), "t_cat");
        assert!(meta.get("projective").unwrap().is_boolean());

        let back = read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, report.instances);
    }

    #[test]
    fn token_counter_subword_table() {
        let tsv = "cat\t3\nsaw\t2\n";
        let counter = TokenCounter::from_tsv(tsv.as_bytes()).unwrap();
        // unknown words count 1
        assert_eq!(counter.count("Mary saw a cat"), 1 + 2 + 1 + 3);
        assert_eq!(TokenCounter::Whitespace.count("Mary saw a cat"), 4);
    }
}
