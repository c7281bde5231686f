//! Identifiers, spans, diagnostics, and the checked [`Program`] with its
//! statement and predicate tables.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::ast::{FunctionDecl, GlobalDecl};

/// Dense, 0-based statement identifier, assigned in source order
/// (function order, then pre-order within each function).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct StatementId(pub u32);

impl StatementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StatementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Dense, 0-based predicate identifier. Predicates are exactly the `if` and
/// `while` statements, numbered in statement-identifier order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct PredicateId(pub u32);

impl PredicateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PredicateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Index of a function in [`Program::functions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FuncId(pub u32);

impl FuncId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Byte range plus line/column of a source construct. Lines and columns are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(start: usize, end: usize, line: u32, col: u32) -> Self {
        Span { start, end, line, col }
    }
}

/// A single frontend diagnostic. Rendered as `line:col: message`; the CLI
/// prefixes the file name to produce `file:line:col: message`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { line: span.line, col: span.col, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

/// Diagnostic list returned by [`super::parse`] on failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

/// Statement kind recorded in the statement table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatementKind {
    Decl,
    Assign,
    If,
    While,
    Return,
    Print,
}

/// Per-statement descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementInfo {
    pub kind: StatementKind,
    pub function: FuncId,
    pub span: Span,
    /// Set when the statement is an `if` or `while`.
    pub predicate: Option<PredicateId>,
}

/// Per-predicate descriptor: owning statement, enclosing function, and the
/// source span of the condition expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateInfo {
    pub statement: StatementId,
    pub function: FuncId,
    pub cond_span: Span,
}

/// A statically checked program with stable identifier tables.
#[derive(Debug, Clone)]
pub struct Program {
    pub functions: Vec<FunctionDecl>,
    pub globals: Vec<GlobalDecl>,
    pub statement_table: Vec<StatementInfo>,
    pub predicate_table: Vec<PredicateInfo>,
    /// FNV-1a 64 digest of the source bytes.
    pub source_digest: u64,
    /// Original source text (spans index into this).
    pub source: String,
    /// Index of the `main` function.
    pub main: FuncId,
}

impl Program {
    pub fn function(&self, id: FuncId) -> &FunctionDecl {
        &self.functions[id.index()]
    }

    pub fn function_by_name(&self, name: &str) -> Option<(FuncId, &FunctionDecl)> {
        self.functions
            .iter()
            .enumerate()
            .find(|(_, f)| f.name == name)
            .map(|(i, f)| (FuncId(i as u32), f))
    }

    pub fn statement(&self, id: StatementId) -> &StatementInfo {
        &self.statement_table[id.index()]
    }

    pub fn predicate(&self, id: PredicateId) -> &PredicateInfo {
        &self.predicate_table[id.index()]
    }

    /// Predicate id of a statement, when the statement is an `if` or `while`.
    pub fn predicate_of(&self, stmt: StatementId) -> Option<PredicateId> {
        self.statement_table.get(stmt.index()).and_then(|s| s.predicate)
    }

    pub fn statement_count(&self) -> usize {
        self.statement_table.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.predicate_table.len()
    }
}

/// One test case: `main` arguments plus the exact text the program must print.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub args: Vec<i64>,
    /// Expected stdout, byte-exact. Line terminators are normalized to `\n`
    /// when suites are loaded from disk.
    pub expected: String,
}

impl TestCase {
    pub fn new(args: Vec<i64>, expected: impl Into<String>) -> Self {
        TestCase { args, expected: normalize_newlines(&expected.into()) }
    }
}

/// Normalize `\r\n` to `\n`.
pub fn normalize_newlines(s: &str) -> String {
    s.replace("\r\n", "\n")
}

/// PASS/FAIL verdict of one test case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

/// A test suite together with per-case baseline verdicts.
#[derive(Debug, Clone)]
pub struct TestSuite {
    pub cases: Vec<TestCase>,
    pub verdicts: Vec<Verdict>,
}

impl TestSuite {
    pub fn failing_indices(&self) -> Vec<usize> {
        self.verdicts
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == Verdict::Fail)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn passing_indices(&self) -> Vec<usize> {
        self.verdicts
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == Verdict::Pass)
            .map(|(i, _)| i)
            .collect()
    }
}
