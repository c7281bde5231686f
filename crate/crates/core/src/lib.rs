//! Batch toolchain that localizes failure-causing control dependence chains in
//! programs written in a small imperative language, searches for predicates whose
//! pattern-based negation repairs failing tests, trains per-predicate classifiers
//! that decide at runtime when to negate, and emits deployable patches.
//!
//! The pipeline stages map onto the top-level modules:
//!
//! - [`minilang`] — frontend: lexing, parsing, static checks, identifier assignment
//! - [`graphs`] — control-flow graph, postdominators, control dependence, chain enumeration
//! - [`runtime`] — deterministic instrumented interpreter with negation hooks
//! - [`localizer`] — chain profiling, Ochiai scoring, causal-effect refinement
//! - [`search`] — single- and multiple-predicate repair search over negation patterns
//! - [`learner`] — state capture schemas, training-set assembly, kernel classifiers
//! - [`patcher`] — deployable patch assembly, persistence, and source annotation

pub mod graphs;
pub mod learner;
pub mod localizer;
pub mod minilang;
pub mod patcher;
pub mod runtime;
pub mod search;

/// Version string recorded in patch provenance.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
