//! Repair search: negation patterns, single-predicate search over
//! (predicate, pattern) pairs, the greedy multiple-predicate search, and
//! scenario classification.

mod pattern;
mod scenario;
mod single;

pub use pattern::{occurrences_for_pattern, Pattern, PATTERNS};
pub use scenario::{classify_scenario, Scenario, SuiteOccurrences};
pub use single::{
    multiple_predicate_search, single_predicate_search, Completeness, RepairRecord, SearchConfig,
    Solution,
};
