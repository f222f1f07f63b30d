//! Command-line front end: treebank transformation, dataset generation,
//! corpus statistics and the semantic-parsing preprocessing utilities.
//!
//! Exit codes: 0 success, 1 usage error (and non-equivalent pairs for
//! `slog-compare`), 2 data error with file/line diagnostics.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use deptrans::align::{posterior_alignments, train_ibm1};
use deptrans::datagen::{
    generate_dataset, generate_simple, linearize_dep_tree, parse_prefix, write_jsonl, write_tsv,
    DatasetInstance, GenConfig, GenReport, InstanceMeta, Mode, Prefix, TokenCounter,
};
use deptrans::logform::{self, reorder_conjuncts, slog_equivalent, strip_nmod};
use deptrans::stats::{
    recursion_depth_histogram, relation_frequencies, summarize, write_depth_csv,
};
use deptrans::transform::{apply_transformation, EdgewiseTransform, Operation};
use deptrans::treebank::{is_projective, parse_conllu, validate_tree, DepTree};
use deptrans::unfold::unfold;

#[derive(Parser)]
#[command(
    name = "deptrans",
    version,
    about = "Syntactic transformations of dependency treebanks"
)]
struct Cli {
    /// Seed for random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for dataset generation (output bytes do not depend
    /// on this).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Suppress progress and skip diagnostics on stderr.
    #[arg(long, global = true, default_value_t = false)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply one edgewise transformation to every sentence and print the
    /// output strings.
    Transform(TransformArgs),
    /// Sample random transformations per sentence and write a dataset.
    Generate(GenerateArgs),
    /// Write a dataset that applies a single operation to all relations
    /// of each sentence (ignore-dep excluded).
    GenerateSimple(GenerateSimpleArgs),
    /// Print the parenthesized linearization of each dependency tree.
    Linearize(LinearizeArgs),
    /// Write recursion-depth histograms (CSV) and a corpus summary (JSON).
    Stats(StatsArgs),
    /// Report structural violations per sentence.
    Validate(ValidateArgs),
    /// Reorder logical-form conjuncts by expected alignment position.
    AtisReorder(AtisReorderArgs),
    /// Compare logical-form files line by line under set equivalence.
    SlogCompare(SlogCompareArgs),
    /// Remove `nmod .` role prefixes from logical forms.
    StripNmod(StripNmodArgs),
}

#[derive(Args)]
struct TransformArgs {
    /// CoNLL-U input file.
    #[arg(long)]
    conllu: PathBuf,
    /// Edgewise map, e.g. "obj=rev,nsubj=bracket".
    #[arg(long)]
    edgewise: Option<String>,
    /// JSON file with the edgewise map as [["obj","rev"], ...].
    #[arg(long)]
    edgewise_file: Option<PathBuf>,
    /// Map relation subtypes to their base relation (acl:relcl -> acl).
    #[arg(long, default_value_t = false)]
    strip_subtypes: bool,
    /// Print the unfolded tree as an s-expression instead of the output
    /// string.
    #[arg(long, default_value_t = false)]
    dump_tree: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    conllu: PathBuf,
    /// Output file (JSON Lines unless --tsv).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    max_relations: usize,
    /// Instances sampled per sentence.
    #[arg(long, default_value_t = 2)]
    per_sentence: usize,
    /// Skip sentences with more input tokens than this.
    #[arg(long, default_value_t = 90)]
    max_in: usize,
    /// Drop instances with more output tokens than this
    /// [default: 180 for generate, unlimited for generate-simple].
    #[arg(long)]
    max_out: Option<usize>,
    /// Restrict the operation inventory, e.g. "rev,bracket,ignore-dep".
    #[arg(long, value_delimiter = ',')]
    ops: Vec<Operation>,
    /// File with extra relations for the inventory, one per line.
    #[arg(long)]
    relations_file: Option<PathBuf>,
    /// word<TAB>count table used for token counting instead of
    /// whitespace tokens.
    #[arg(long)]
    subword_counts: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    strip_subtypes: bool,
    /// Write prefix<TAB>input<TAB>output lines instead of JSON.
    #[arg(long, default_value_t = false)]
    tsv: bool,
}

#[derive(Args)]
struct GenerateSimpleArgs {
    #[command(flatten)]
    generate: GenerateArgs,
    /// Use this single operation instead of sampling one per instance.
    #[arg(long)]
    op: Option<Operation>,
}

#[derive(Args)]
struct LinearizeArgs {
    #[arg(long)]
    conllu: PathBuf,
    /// Also write the linearizations as dataset instances to this JSON
    /// Lines file (mode "depparse").
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    strip_subtypes: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    conllu: PathBuf,
    /// Relations for the depth histograms; defaults to every relation
    /// observed in the corpus.
    #[arg(long, value_delimiter = ',')]
    relations: Vec<String>,
    /// CSV output path for the histograms.
    #[arg(long, default_value = "stats_depths.csv")]
    csv: PathBuf,
    /// JSON output path for the corpus summary.
    #[arg(long, default_value = "stats_summary.json")]
    summary: PathBuf,
    #[arg(long, default_value_t = false)]
    strip_subtypes: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    conllu: PathBuf,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("corpus_input").required(true).args(["pairs", "src"]))]
struct AtisReorderArgs {
    /// Tokenized natural-language sentences, one per line.
    #[arg(long, requires = "lf", conflicts_with = "pairs")]
    src: Option<PathBuf>,
    /// Logical forms, line-aligned with --src.
    #[arg(long, requires = "src", conflicts_with = "pairs")]
    lf: Option<PathBuf>,
    /// Alternative input: sentence<TAB>logical-form lines.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// EM iterations for the alignment model.
    #[arg(long, default_value_t = 10)]
    iters: usize,
    /// Operator names treated as conjunctions.
    #[arg(long, value_delimiter = ',', default_values_t = [
        "and".to_string(), "or".to_string(), "intersection".to_string()
    ])]
    conj_ops: Vec<String>,
    /// Reorder only conjunctions with no conjunction ancestor.
    #[arg(long, default_value_t = false)]
    top_level_only: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SlogCompareArgs {
    /// First logical-form file.
    #[arg(long)]
    a: PathBuf,
    /// Second logical-form file, line-aligned with --a.
    #[arg(long)]
    b: PathBuf,
}

#[derive(Args)]
struct StripNmodArgs {
    /// Logical forms, one per line.
    #[arg(long)]
    lf: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("deptrans: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Transform(args) => cmd_transform(args),
        Command::Generate(args) => cmd_generate(&cli, args, None),
        Command::GenerateSimple(args) => cmd_generate(&cli, &args.generate, Some(args.op)),
        Command::Linearize(args) => cmd_linearize(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Validate(args) => cmd_validate(args),
        Command::AtisReorder(args) => cmd_atis_reorder(args),
        Command::SlogCompare(args) => cmd_slog_compare(args),
        Command::StripNmod(args) => cmd_strip_nmod(args),
    }
}

fn load_corpus(path: &Path, strip_subtypes: bool) -> Result<Vec<DepTree>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut corpus = parse_conllu(BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))?;
    if strip_subtypes {
        for tree in &mut corpus {
            tree.strip_subtypes();
        }
    }
    Ok(corpus)
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    BufReader::new(file)
        .lines()
        .collect::<io::Result<Vec<_>>>()
        .with_context(|| format!("reading {}", path.display()))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_transform(args: &TransformArgs) -> Result<u8> {
    let transform = match (&args.edgewise, &args.edgewise_file) {
        (Some(_), Some(_)) => bail!("--edgewise and --edgewise-file are mutually exclusive"),
        (Some(text), None) => parse_prefix(text).context("parsing --edgewise")?,
        (None, Some(path)) => {
            let file =
                File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            let pairs: Vec<(String, Operation)> = serde_json::from_reader(BufReader::new(file))
                .with_context(|| format!("parsing {}", path.display()))?;
            EdgewiseTransform::from_pairs(pairs).context("building edgewise map")?
        }
        (None, None) => EdgewiseTransform::empty(),
    };
    let corpus = load_corpus(&args.conllu, args.strip_subtypes)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for tree in &corpus {
        if args.dump_tree {
            let unfolded = unfold(tree)?;
            writeln!(out, "{}", unfolded.to_sexp())?;
        } else {
            writeln!(out, "{}", apply_transformation(tree, &transform)?)?;
        }
    }
    Ok(0)
}

fn build_config(cli: &Cli, args: &GenerateArgs, default_max_out: usize) -> Result<GenConfig> {
    let mut cfg = GenConfig {
        max_relations: args.max_relations,
        transforms_per_sentence: args.per_sentence,
        max_input_tokens: args.max_in,
        max_output_tokens: args.max_out.unwrap_or(default_max_out),
        seed: cli.seed,
        ..GenConfig::default()
    };
    if !args.ops.is_empty() {
        cfg.operation_inventory = args.ops.clone();
    }
    if let Some(path) = &args.relations_file {
        cfg.extra_relations = read_lines(path)?
            .into_iter()
            .map(|line| line.trim().to_string())
            .filter(|line| !line.is_empty())
            .collect::<BTreeSet<_>>();
    }
    if let Some(path) = &args.subword_counts {
        let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        cfg.token_counter = TokenCounter::from_tsv(BufReader::new(file))
            .with_context(|| format!("parsing {}", path.display()))?;
    }
    Ok(cfg)
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs, simple: Option<Option<Operation>>) -> Result<u8> {
    let corpus = load_corpus(&args.conllu, args.strip_subtypes)?;
    // the simple baseline keeps over-length outputs unless a limit is given
    let default_max_out = if simple.is_some() { usize::MAX } else { 180 };
    let mut cfg = build_config(cli, args, default_max_out)?;

    let report: GenReport = {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers.max(1))
            .build()
            .context("building worker pool")?;
        match simple {
            None => pool.install(|| generate_dataset(&corpus, &cfg))?,
            Some(op) => {
                if let Some(op) = op {
                    cfg.operation_inventory = vec![op];
                }
                pool.install(|| generate_simple(&corpus, &cfg))?
            }
        }
    };

    let file =
        File::create(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut writer = BufWriter::new(file);
    if args.tsv {
        write_tsv(&report.instances, &mut writer)?;
    } else {
        write_jsonl(&report.instances, &mut writer)?;
    }
    writer.flush()?;

    if !cli.quiet {
        eprintln!(
            "wrote {} instances ({} invalid sentences skipped, {} over-length sentences skipped, {} over-length outputs dropped)",
            report.instances.len(),
            report.skipped_invalid,
            report.skipped_long_input,
            report.dropped_long_output
        );
    }
    Ok(0)
}

fn cmd_linearize(args: &LinearizeArgs) -> Result<u8> {
    let corpus = load_corpus(&args.conllu, args.strip_subtypes)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut instances = Vec::new();
    for tree in &corpus {
        let linearized = linearize_dep_tree(tree)?;
        writeln!(out, "{linearized}")?;
        if args.jsonl.is_some() {
            instances.push(DatasetInstance {
                prefix: Prefix::Edgewise(EdgewiseTransform::empty()),
                input: tree.tokens.iter().map(|t| t.form.clone()).collect(),
                output: linearized,
                meta: InstanceMeta {
                    sent_id: tree.sentence_id.clone(),
                    mode: Mode::DepParse,
                    projective: is_projective(tree)?,
                },
            });
        }
    }
    if let Some(path) = &args.jsonl {
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        write_jsonl(&instances, BufWriter::new(file))?;
    }
    Ok(0)
}

fn cmd_stats(args: &StatsArgs) -> Result<u8> {
    let corpus = load_corpus(&args.conllu, args.strip_subtypes)?;
    for (i, tree) in corpus.iter().enumerate() {
        let report = validate_tree(tree);
        if !report.ok() {
            bail!("sentence {} (`{}`): {}", i + 1, tree.sentence_id, report);
        }
    }

    let relations: Vec<String> = if args.relations.is_empty() {
        relation_frequencies(&corpus).into_keys().collect()
    } else {
        args.relations.clone()
    };
    let histograms: Vec<_> = relations
        .iter()
        .map(|rel| recursion_depth_histogram(&corpus, rel))
        .collect();

    let csv_file =
        File::create(&args.csv).with_context(|| format!("cannot create {}", args.csv.display()))?;
    write_depth_csv(&histograms, BufWriter::new(csv_file))?;

    let summary = summarize(&corpus)?;
    let summary_file = File::create(&args.summary)
        .with_context(|| format!("cannot create {}", args.summary.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(summary_file), &summary)?;
    Ok(0)
}

fn cmd_validate(args: &ValidateArgs) -> Result<u8> {
    let corpus = load_corpus(&args.conllu, false)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut bad = 0usize;
    for tree in &corpus {
        let report = validate_tree(tree);
        if !report.ok() {
            bad += 1;
        }
        writeln!(out, "{}\t{}", tree.sentence_id, report)?;
    }
    if bad > 0 {
        eprintln!(
            "deptrans: {bad} of {} sentences have violations",
            corpus.len()
        );
        return Ok(2);
    }
    Ok(0)
}

fn cmd_atis_reorder(args: &AtisReorderArgs) -> Result<u8> {
    let (sources, forms, lf_name) = match (&args.pairs, &args.src, &args.lf) {
        (Some(path), None, None) => {
            let mut sources = Vec::new();
            let mut forms = Vec::new();
            for (lineno, line) in read_lines(path)?.into_iter().enumerate() {
                let (src, lf) = line.split_once('\t').ok_or_else(|| {
                    anyhow!(
                        "{} line {}: expected sentence<TAB>logical-form",
                        path.display(),
                        lineno + 1
                    )
                })?;
                sources.push(src.to_string());
                forms.push(lf.to_string());
            }
            (sources, forms, path.display().to_string())
        }
        (None, Some(src), Some(lf)) => {
            let sources = read_lines(src)?;
            let forms = read_lines(lf)?;
            if sources.len() != forms.len() {
                bail!(
                    "{} has {} lines but {} has {}",
                    src.display(),
                    sources.len(),
                    lf.display(),
                    forms.len()
                );
            }
            (sources, forms, lf.display().to_string())
        }
        _ => bail!("provide either --pairs or both --src and --lf"),
    };

    let mut parsed = Vec::with_capacity(forms.len());
    let mut pairs = Vec::with_capacity(forms.len());
    for (lineno, (src, lf)) in sources.iter().zip(&forms).enumerate() {
        let node =
            logform::parse(lf).map_err(|e| anyhow!("{} line {}: {}", lf_name, lineno + 1, e))?;
        let src_tokens: Vec<String> = src.split_whitespace().map(str::to_string).collect();
        if src_tokens.is_empty() {
            bail!("line {}: empty sentence", lineno + 1);
        }
        pairs.push((src_tokens, node.tokens()));
        parsed.push(node);
    }

    let trained = train_ibm1(&pairs, args.iters).context("training alignment model")?;
    let conj_ops: HashSet<String> = args.conj_ops.iter().cloned().collect();

    let mut out = open_output(args.out.as_deref())?;
    for ((source, target), node) in pairs.iter().zip(&parsed) {
        let matrix = posterior_alignments(&trained.model, source, target);
        let reordered = reorder_conjuncts(node, &matrix, &conj_ops, !args.top_level_only)?;
        writeln!(out, "{}", reordered.render())?;
    }
    out.flush()?;
    Ok(0)
}

fn cmd_slog_compare(args: &SlogCompareArgs) -> Result<u8> {
    let first = read_lines(&args.a)?;
    let second = read_lines(&args.b)?;
    if first.len() != second.len() {
        bail!(
            "{} has {} lines but {} has {}",
            args.a.display(),
            first.len(),
            args.b.display(),
            second.len()
        );
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut all_equivalent = true;
    for (lineno, (a, b)) in first.iter().zip(&second).enumerate() {
        let equivalent =
            slog_equivalent(a, b).map_err(|e| anyhow!("line {}: {}", lineno + 1, e))?;
        all_equivalent &= equivalent;
        writeln!(out, "{equivalent}")?;
    }
    Ok(if all_equivalent { 0 } else { 1 })
}

fn cmd_strip_nmod(args: &StripNmodArgs) -> Result<u8> {
    let lines = read_lines(&args.lf)?;
    let mut out = open_output(args.out.as_deref())?;
    for line in &lines {
        writeln!(out, "{}", strip_nmod(line))?;
    }
    out.flush()?;
    Ok(0)
}
