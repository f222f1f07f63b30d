//! Variable-free logical forms: parsing, rendering, nmod stripping,
//! set-based equivalence and alignment-driven conjunct reordering.
//!
//! The surface syntax covers both role-labeled forms like
//! `forward ( agent = Isabella , theme = box ( on = tree ) )` and plain
//! functional forms like `answer ( intersection ( flight , nonstop ) )`.
//! Atoms may carry a definiteness marker, e.g. `* turtle`.

use std::collections::HashSet;

use thiserror::Error;

/// A node of a logical form: an operator or atom name with ordered,
/// optionally role-labeled children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfNode {
    /// Definiteness marker `*` in front of the name.
    pub definite: bool,
    pub label: String,
    pub children: Vec<LfChild>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfChild {
    /// Role label for `role = value` children; `None` for plain arguments.
    pub role: Option<String>,
    pub node: LfNode,
}

impl LfNode {
    pub fn atom(label: impl Into<String>) -> Self {
        LfNode {
            definite: false,
            label: label.into(),
            children: Vec::new(),
        }
    }

    /// All tokens of this node's rendering, in order.
    pub fn tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens(&self, out: &mut Vec<String>) {
        if self.definite {
            out.push("*".to_string());
        }
        out.push(self.label.clone());
        if !self.children.is_empty() {
            out.push("(".to_string());
            for (i, child) in self.children.iter().enumerate() {
                if i > 0 {
                    out.push(",".to_string());
                }
                if let Some(role) = &child.role {
                    out.extend(role.split_whitespace().map(str::to_string));
                    out.push("=".to_string());
                }
                child.node.collect_tokens(out);
            }
            out.push(")".to_string());
        }
    }

    /// Space-joined rendering.
    pub fn render(&self) -> String {
        self.tokens().join(" ")
    }
}

impl std::fmt::Display for LfNode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("token {position}: {message}")]
pub struct LfParseError {
    /// 1-based token position of the problem.
    pub position: usize,
    pub message: String,
}

/// Split a logical-form string into tokens. Whitespace separates tokens;
/// parentheses, commas and `=` are split off even when written without
/// surrounding spaces.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_whitespace() || matches!(c, '(' | ')' | ',' | '=') {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            if !c.is_whitespace() {
                tokens.push(c.to_string());
            }
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Parse a logical form.
pub fn parse(text: &str) -> Result<LfNode, LfParseError> {
    let tokens = tokenize(text);
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
    };
    let node = parser.parse_node()?;
    if parser.pos != tokens.len() {
        return Err(parser.error("trailing tokens after logical form"));
    }
    Ok(node)
}

struct Parser<'a> {
    tokens: &'a [String],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> LfParseError {
        LfParseError {
            position: self.pos + 1,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&str> {
        self.tokens.get(self.pos).map(|s| s.as_str())
    }

    fn bump(&mut self) -> Option<&'a str> {
        let tok = self.tokens.get(self.pos).map(|s| s.as_str());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn parse_node(&mut self) -> Result<LfNode, LfParseError> {
        let mut definite = false;
        if self.peek() == Some("*") {
            definite = true;
            self.bump();
        }
        let label = match self.bump() {
            Some(tok) if !is_special(tok) => tok.to_string(),
            Some(tok) => {
                self.pos -= 1;
                return Err(self.error(format!("expected a name, found `{tok}`")));
            }
            None => return Err(self.error("expected a name, found end of input")),
        };
        let mut children = Vec::new();
        if self.peek() == Some("(") {
            self.bump();
            loop {
                children.push(self.parse_child()?);
                match self.bump() {
                    Some(",") => continue,
                    Some(")") => break,
                    Some(tok) => {
                        self.pos -= 1;
                        return Err(self.error(format!("expected `,` or `)`, found `{tok}`")));
                    }
                    None => return Err(self.error("unclosed `(`")),
                }
            }
        }
        Ok(LfNode {
            definite,
            label,
            children,
        })
    }

    fn parse_child(&mut self) -> Result<LfChild, LfParseError> {
        // A role is a run of plain tokens directly followed by `=`. The
        // definiteness marker belongs to the value, never to a role.
        let mut lookahead = self.pos;
        while lookahead < self.tokens.len()
            && !is_special(&self.tokens[lookahead])
            && self.tokens[lookahead] != "*"
        {
            lookahead += 1;
        }
        let role = if lookahead > self.pos
            && self.tokens.get(lookahead).map(|s| s.as_str()) == Some("=")
        {
            let role = self.tokens[self.pos..lookahead].join(" ");
            self.pos = lookahead + 1;
            Some(role)
        } else {
            None
        };
        let node = self.parse_node()?;
        Ok(LfChild { role, node })
    }
}

fn is_special(token: &str) -> bool {
    matches!(token, "(" | ")" | "," | "=")
}

/// Remove every `nmod .` token pair that precedes a role label, e.g.
/// `box ( nmod . on = tree )` becomes `box ( on = tree )`. Everything else
/// is preserved up to single-space joining. Runs to a fixpoint so the
/// result never contains a removable pair.
pub fn strip_nmod(text: &str) -> String {
    let mut current: Vec<&str> = text.split_whitespace().collect();
    loop {
        let next = strip_nmod_once(&current);
        if next.len() == current.len() {
            return current.join(" ");
        }
        current = next;
    }
}

fn strip_nmod_once<'a>(tokens: &[&'a str]) -> Vec<&'a str> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i] == "nmod"
            && tokens.get(i + 1).copied() == Some(".")
            && tokens
                .get(i + 2)
                .is_some_and(|t| !is_special(t) && *t != ".")
            && tokens.get(i + 3).copied() == Some("=")
        {
            i += 2; // drop `nmod .`, continue from the role label
            continue;
        }
        out.push(tokens[i]);
        i += 1;
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompareError {
    #[error("first form: {0}")]
    First(LfParseError),
    #[error("second form: {0}")]
    Second(LfParseError),
}

/// Compare two logical forms treating every node's children as an
/// unordered multiset; operator names, atoms and definiteness markers
/// compare exactly.
pub fn slog_equivalent(first: &str, second: &str) -> Result<bool, CompareError> {
    let a = parse(first).map_err(CompareError::First)?;
    let b = parse(second).map_err(CompareError::Second)?;
    Ok(canonical(&a) == canonical(&b))
}

/// Canonical rendering with children sorted recursively; equal canonical
/// strings mean set-equivalent forms.
fn canonical(node: &LfNode) -> String {
    let mut parts: Vec<String> = node
        .children
        .iter()
        .map(|child| {
            let inner = canonical(&child.node);
            match &child.role {
                Some(role) => format!("{role} = {inner}"),
                None => inner,
            }
        })
        .collect();
    parts.sort();
    let mut out = String::new();
    if node.definite {
        out.push_str("* ");
    }
    out.push_str(&node.label);
    if !parts.is_empty() {
        out.push_str(" ( ");
        out.push_str(&parts.join(" , "));
        out.push_str(" )");
    }
    out
}

#[derive(Debug, Error)]
pub enum ReorderError {
    #[error(
        "alignment matrix covers {matrix} target positions but the logical form renders to {tokens} tokens"
    )]
    DimensionMismatch { matrix: usize, tokens: usize },
    #[error("alignment matrix contains a non-finite value at [{i}][{j}]")]
    NonFinite { i: usize, j: usize },
    #[error("alignment matrix rows have unequal lengths")]
    RaggedMatrix,
}

/// Sort the children of every conjunction node by their sum-total expected
/// alignment position A(C) = sum over the conjunct's token positions j of
/// sum_i A[i][j] * i, with 1-based source positions i. The sort is stable:
/// conjuncts with equal keys keep their order. With `recursive` false only
/// conjunction nodes that have no conjunction ancestor are reordered.
///
/// `alignment` must be the posterior matrix computed for (sentence,
/// rendering of `lf`): rows are source positions, columns target token
/// positions.
pub fn reorder_conjuncts(
    lf: &LfNode,
    alignment: &[Vec<f64>],
    conjunction_ops: &HashSet<String>,
    recursive: bool,
) -> Result<LfNode, ReorderError> {
    let column_weight = column_weights(lf, alignment)?;
    // All keys are computed against the input rendering before any
    // reordering, so nested sorts cannot disturb each other.
    let mut offset = 0;
    let mut keys = Vec::new();
    Ok(rebuild(
        lf,
        &column_weight,
        conjunction_ops,
        recursive,
        true,
        &mut offset,
        &mut keys,
    ))
}

/// The A(C) sort key of every conjunct: for each conjunction node in
/// depth-first order, the keys of its children in their original order.
/// Uses the same span bookkeeping as [`reorder_conjuncts`].
pub fn conjunct_keys(
    lf: &LfNode,
    alignment: &[Vec<f64>],
    conjunction_ops: &HashSet<String>,
) -> Result<Vec<Vec<f64>>, ReorderError> {
    let column_weight = column_weights(lf, alignment)?;
    let mut offset = 0;
    let mut keys = Vec::new();
    // allowed=false with recursive=false disables every sort, so this
    // only records the keys
    rebuild(
        lf,
        &column_weight,
        conjunction_ops,
        false,
        false,
        &mut offset,
        &mut keys,
    );
    Ok(keys)
}

/// Validate the matrix against the rendering and collapse it to the
/// expected 1-based source position per target token.
fn column_weights(lf: &LfNode, alignment: &[Vec<f64>]) -> Result<Vec<f64>, ReorderError> {
    let token_count = lf.tokens().len();
    for (i, row) in alignment.iter().enumerate() {
        if row.len() != alignment[0].len() {
            return Err(ReorderError::RaggedMatrix);
        }
        for (j, value) in row.iter().enumerate() {
            if !value.is_finite() {
                return Err(ReorderError::NonFinite { i, j });
            }
        }
    }
    let matrix_cols = alignment.first().map_or(0, |row| row.len());
    if matrix_cols != token_count {
        return Err(ReorderError::DimensionMismatch {
            matrix: matrix_cols,
            tokens: token_count,
        });
    }
    Ok((0..token_count)
        .map(|j| {
            alignment
                .iter()
                .enumerate()
                .map(|(i, row)| row[j] * (i + 1) as f64)
                .sum()
        })
        .collect())
}

/// Rebuilds the tree while tracking each subtree's token span in the
/// original rendering. `allowed` is false inside a conjunction when the
/// reordering is top-level only. The keys of every conjunction node's
/// children are appended to `keys` in depth-first order.
fn rebuild(
    node: &LfNode,
    column_weight: &[f64],
    conjunction_ops: &HashSet<String>,
    recursive: bool,
    allowed: bool,
    offset: &mut usize,
    keys: &mut Vec<Vec<f64>>,
) -> LfNode {
    if node.definite {
        *offset += 1;
    }
    *offset += 1; // label
    let is_conjunction = conjunction_ops.contains(&node.label);
    let child_allowed = recursive || (allowed && !is_conjunction);
    let keys_slot = if is_conjunction {
        keys.push(Vec::with_capacity(node.children.len()));
        Some(keys.len() - 1)
    } else {
        None
    };

    let mut rebuilt: Vec<(LfChild, f64)> = Vec::with_capacity(node.children.len());
    if !node.children.is_empty() {
        *offset += 1; // "("
        for (i, child) in node.children.iter().enumerate() {
            if i > 0 {
                *offset += 1; // ","
            }
            if let Some(role) = &child.role {
                *offset += role.split_whitespace().count() + 1; // role tokens and "="
            }
            let start = *offset;
            let new_node = rebuild(
                &child.node,
                column_weight,
                conjunction_ops,
                recursive,
                child_allowed,
                offset,
                keys,
            );
            let key: f64 = column_weight[start..*offset].iter().sum();
            if let Some(slot) = keys_slot {
                keys[slot].push(key);
            }
            rebuilt.push((
                LfChild {
                    role: child.role.clone(),
                    node: new_node,
                },
                key,
            ));
        }
        *offset += 1; // ")"
    }

    if is_conjunction && (allowed || recursive) {
        rebuilt.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("keys are finite"));
    }
    LfNode {
        definite: node.definite,
        label: node.label.clone(),
        children: rebuilt.into_iter().map(|(child, _)| child).collect(),
    }
}
