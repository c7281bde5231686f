//! Coverage-based fault localization over control dependence chains:
//! iterative-deepening chain profiling, Ochiai scoring, causal-effect
//! refinement, and suspicious-predicate extraction.

mod causal;
mod coverage;
mod localize;
pub mod oracle;

pub use causal::{causal_effect, residual_orthogonality, CausalModelFit};
pub use coverage::{
    chain_covered, ochiai, profile_suite, profile_traces, record_traces, ChainCoverageMatrix,
    ChainScore, SuiteTraces,
};
pub use localize::{
    fit_chain_statements, localize, refine, LocalizeConfig, LocalizeExit, LocalizeOutcome, RefineOutcome,
    INTERPRETATION_NOTES,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LocalizeError {
    #[error("suite has no failing tests; localization is meaningless")]
    NoFailingTests,
    #[error("nothing to localize: the program has no control dependences")]
    NothingToLocalize,
    #[error("profiling at chain length {length} exceeded the {budget_secs} s budget")]
    ProfilingInfeasible { length: usize, budget_secs: u64 },
    #[error(transparent)]
    Graph(#[from] crate::graphs::GraphError),
    #[error("localization infeasible at the first chain length: {0}")]
    InfeasibleAtFirstLength(String),
    #[error("no candidate chains: every executed chain was discarded or nothing was covered")]
    NoCandidateChains,
}

#[cfg(test)]
mod tests;
