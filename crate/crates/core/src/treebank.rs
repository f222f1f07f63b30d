//! CoNLL-U treebank ingestion, validation and projectivity.
//!
//! The parser reads the standard ten-column tab-separated format. Multiword
//! token ranges (`3-4`) and empty nodes (`3.1`) are skipped so that all
//! downstream operations work on syntactic words only. Structural problems
//! (cycles, missing roots, ...) are *not* parse errors; they are reported by
//! [`validate_tree`] so that corpus runs can skip bad sentences and keep
//! going.

use std::fmt;
use std::io::BufRead;

use thiserror::Error;

/// One syntactic word of a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    /// Surface form.
    pub form: String,
    /// Lemma; falls back to the form when the treebank has `_`.
    pub lemma: String,
    /// Universal POS tag, if given.
    pub upos: Option<String>,
    /// Index of the governing token; 0 means this is the root.
    pub head: usize,
    /// Dependency relation label, including any subtype (`acl:relcl`).
    pub deprel: String,
}

/// A parsed sentence: tokens with contiguous indices starting at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepTree {
    pub sentence_id: String,
    pub tokens: Vec<Token>,
}

impl DepTree {
    /// Surface forms in sentence order.
    pub fn forms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.form.as_str()).collect()
    }

    /// The space-joined surface string.
    pub fn text(&self) -> String {
        self.forms().join(" ")
    }

    /// Token at a 1-based index.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    /// 1-based indices of the dependents of `head`, in surface order.
    /// `head` may be 0 to list the root(s).
    pub fn dependents(&self, head: usize) -> Vec<usize> {
        self.tokens
            .iter()
            .filter(|t| t.head == head)
            .map(|t| t.index)
            .collect()
    }

    /// Drop relation subtypes: `acl:relcl` becomes `acl`.
    pub fn strip_subtypes(&mut self) {
        for tok in &mut self.tokens {
            if let Some(pos) = tok.deprel.find(':') {
                tok.deprel.truncate(pos);
            }
        }
    }

    /// Re-serialize to CoNLL-U. Only the fields retained by the parser are
    /// written; the XPOS, FEATS, DEPS and MISC columns come out as `_`.
    pub fn to_conllu(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# sent_id = {}\n", self.sentence_id));
        for t in &self.tokens {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_\n",
                t.index,
                t.form,
                t.lemma,
                t.upos.as_deref().unwrap_or("_"),
                t.head,
                t.deprel
            ));
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: expected 10 tab-separated columns, got {got}")]
    ColumnCount { line: usize, got: usize },
    #[error("line {line}: non-integer HEAD field `{value}`")]
    BadHead { line: usize, value: String },
    #[error("line {line}: non-integer ID field `{value}`")]
    BadId { line: usize, value: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parse a CoNLL-U stream into one [`DepTree`] per sentence block.
///
/// Multiword-token range lines and empty-node lines are skipped. A lemma of
/// `_` falls back to the form. The sentence id is taken from a `# sent_id`
/// comment when present, otherwise a running 1-based counter is used.
pub fn parse_conllu<R: BufRead>(reader: R) -> Result<Vec<DepTree>, ParseError> {
    let mut trees = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut sent_id: Option<String> = None;
    let mut counter = 0usize;
    let mut in_block = false;

    // comment-only blocks are not sentences
    let mut flush = |tokens: &mut Vec<Token>, sent_id: &mut Option<String>, in_block: &mut bool| {
        if *in_block && !tokens.is_empty() {
            counter += 1;
            trees.push(DepTree {
                sentence_id: sent_id.take().unwrap_or_else(|| counter.to_string()),
                tokens: std::mem::take(tokens),
            });
        }
        sent_id.take();
        *in_block = false;
    };

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim_end_matches(['\n', '\r']);

        if line.is_empty() {
            flush(&mut tokens, &mut sent_id, &mut in_block);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            in_block = true;
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    sent_id = Some(value.trim().to_string());
                }
            }
            continue;
        }

        in_block = true;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ParseError::ColumnCount {
                line: lineno,
                got: cols.len(),
            });
        }
        // Multiword ranges ("3-4") and empty nodes ("3.1") carry no syntax.
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let index: usize = cols[0].parse().map_err(|_| ParseError::BadId {
            line: lineno,
            value: cols[0].to_string(),
        })?;
        let head: usize = cols[6].parse().map_err(|_| ParseError::BadHead {
            line: lineno,
            value: cols[6].to_string(),
        })?;
        let form = cols[1].to_string();
        let lemma = if cols[2] == "_" {
            form.clone()
        } else {
            cols[2].to_string()
        };
        let upos = if cols[3] == "_" {
            None
        } else {
            Some(cols[3].to_string())
        };
        tokens.push(Token {
            index,
            form,
            lemma,
            upos,
            head,
            deprel: cols[7].to_string(),
        });
    }
    flush(&mut tokens, &mut sent_id, &mut in_block);
    Ok(trees)
}

/// A structural problem found by [`validate_tree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Token indices are not the contiguous range 1..n.
    NonContiguousIndices,
    /// No token has head 0.
    NoRoot,
    /// More than one token has head 0.
    MultipleRoots,
    /// A head index points outside 1..n.
    HeadOutOfRange { token: usize, head: usize },
    /// A token is its own head.
    SelfHead { token: usize },
    /// The head relation contains a cycle through this token.
    Cycle { token: usize },
    /// Empty surface form.
    EmptyForm { token: usize },
    /// Empty dependency relation.
    EmptyDeprel { token: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonContiguousIndices => write!(f, "token indices not contiguous from 1"),
            Violation::NoRoot => write!(f, "no root"),
            Violation::MultipleRoots => write!(f, "multiple roots"),
            Violation::HeadOutOfRange { token, head } => {
                write!(f, "token {token}: head {head} out of range")
            }
            Violation::SelfHead { token } => write!(f, "token {token}: token is its own head"),
            Violation::Cycle { token } => write!(f, "cycle through token {token}"),
            Violation::EmptyForm { token } => write!(f, "token {token}: empty form"),
            Violation::EmptyDeprel { token } => write!(f, "token {token}: empty deprel"),
        }
    }
}

/// Result of validating a tree: either clean or a list of violations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            write!(f, "ok")
        } else {
            let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            write!(f, "{}", msgs.join("; "))
        }
    }
}

/// Check every [`DepTree`] invariant and report each violation.
///
/// A tree that passes validation is accepted by unfolding and everything
/// downstream of it.
pub fn validate_tree(tree: &DepTree) -> ValidationReport {
    let mut violations = Vec::new();
    let n = tree.tokens.len();

    for (i, tok) in tree.tokens.iter().enumerate() {
        if tok.index != i + 1 {
            violations.push(Violation::NonContiguousIndices);
            // Index bookkeeping is off; the remaining checks would read
            // through the wrong positions.
            return ValidationReport { violations };
        }
    }

    let roots = tree.tokens.iter().filter(|t| t.head == 0).count();
    if roots == 0 {
        violations.push(Violation::NoRoot);
    } else if roots > 1 {
        violations.push(Violation::MultipleRoots);
    }

    for tok in &tree.tokens {
        if tok.head == tok.index {
            violations.push(Violation::SelfHead { token: tok.index });
        } else if tok.head > n {
            violations.push(Violation::HeadOutOfRange {
                token: tok.index,
                head: tok.head,
            });
        }
        if tok.form.is_empty() {
            violations.push(Violation::EmptyForm { token: tok.index });
        }
        if tok.deprel.is_empty() {
            violations.push(Violation::EmptyDeprel { token: tok.index });
        }
    }

    // Cycle detection by walking head links with three-state coloring.
    // 0 = unvisited, 1 = on the current walk, 2 = done.
    let mut color = vec![0u8; n + 1];
    for start in 1..=n {
        if color[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            if cur == 0 || cur > n {
                break;
            }
            match color[cur] {
                1 => {
                    violations.push(Violation::Cycle { token: cur });
                    break;
                }
                2 => break,
                _ => {
                    color[cur] = 1;
                    path.push(cur);
                    let next = tree.tokens[cur - 1].head;
                    if next == cur {
                        break; // self-head already reported
                    }
                    cur = next;
                }
            }
        }
        for p in path {
            color[p] = 2;
        }
    }

    ValidationReport { violations }
}

#[derive(Debug, Error)]
#[error("invalid tree `{sentence_id}`: {report}")]
pub struct InvalidTree {
    pub sentence_id: String,
    pub report: ValidationReport,
}

/// Validate and return the tree's violations as an error, if any.
pub fn require_valid(tree: &DepTree) -> Result<(), InvalidTree> {
    let report = validate_tree(tree);
    if report.ok() {
        Ok(())
    } else {
        Err(InvalidTree {
            sentence_id: tree.sentence_id.clone(),
            report,
        })
    }
}

/// True iff no two dependency arcs cross: for every edge (h, d), every token
/// strictly between them is a descendant of h.
pub fn is_projective(tree: &DepTree) -> Result<bool, InvalidTree> {
    require_valid(tree)?;

    // ancestor chain lookup; head links are acyclic after validation
    let is_descendant_of = |mut tok: usize, anc: usize| -> bool {
        while tok != 0 {
            if tok == anc {
                return true;
            }
            tok = tree.tokens[tok - 1].head;
        }
        false
    };

    for tok in &tree.tokens {
        if tok.head == 0 {
            continue;
        }
        let (lo, hi) = (tok.head.min(tok.index), tok.head.max(tok.index));
        for between in lo + 1..hi {
            if !is_descendant_of(between, tok.head) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
