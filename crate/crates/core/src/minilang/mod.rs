//! Frontend for the bundled imperative language: lexing, parsing, static checks,
//! and stable statement/predicate identifier assignment.
//!
//! Source files use the `.acdc` extension and are UTF-8. The grammar is documented
//! in `docs/language.md`. Parsing is deterministic: the same source always yields
//! identical statement and predicate tables and the same content digest.

mod ast;
mod check;
mod lexer;
mod parser;
mod program;

pub use ast::{BinOp, Expr, ExprKind, FunctionDecl, GlobalDecl, Literal, Stmt, StmtKind, Type};
pub use program::{
    Diagnostic, Diagnostics, FuncId, PredicateId, Program, Span, StatementId, StatementInfo,
    StatementKind, PredicateInfo, TestCase, TestSuite, Verdict,
};

/// Parse and statically check a source text, assigning dense statement and
/// predicate identifiers in source order.
pub fn parse(source: &str) -> Result<Program, Diagnostics> {
    let tokens = lexer::lex(source).map_err(|d| Diagnostics(vec![d]))?;
    let mut src_program = parser::parse_tokens(tokens).map_err(|d| Diagnostics(vec![d]))?;
    check::check_and_assign(&mut src_program, source)
}

/// All predicate sites of a program, in identifier order.
///
/// Every entry corresponds to an `if` or `while` statement; the order follows
/// statement identifiers (function order, then pre-order within each function).
pub fn predicate_sites(program: &Program) -> Vec<PredicateId> {
    (0..program.predicate_table.len() as u32)
        .map(PredicateId)
        .collect()
}

/// FNV-1a 64-bit digest, used for source content digests, string feature
/// reduction, and array feature folding.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x100_0000_01b3;
    let mut h = OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

#[cfg(test)]
mod tests;
