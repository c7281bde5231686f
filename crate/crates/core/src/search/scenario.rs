//! Scenario taxonomy: when and where a solution's negation is needed.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::minilang::{PredicateId, Program, TestSuite, Verdict};
use crate::runtime::{count_occurrences, ExecConfig};
use std::collections::BTreeMap;

use super::pattern::occurrences_for_pattern;
use super::single::Solution;

/// The five repair scenarios:
/// 1. the predicate is exercised only by failing runs (negate whenever seen);
/// 2. exercised by both kinds of runs, negated throughout failing runs;
/// 3. exercised by both, negated only at specific occurrences of failing runs;
/// 4. exercised by both, negated throughout some failing runs and at specific
///    occurrences of others;
/// 5. the repair needs multiple predicates, each with its own classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    FailingOnlyCoverage,
    WholeRunNegation,
    SpecificOccurrences,
    Mixed,
    MultiplePredicates,
}

impl Scenario {
    pub fn number(self) -> u8 {
        match self {
            Scenario::FailingOnlyCoverage => 1,
            Scenario::WholeRunNegation => 2,
            Scenario::SpecificOccurrences => 3,
            Scenario::Mixed => 4,
            Scenario::MultiplePredicates => 5,
        }
    }

    pub fn from_number(n: u8) -> Option<Scenario> {
        match n {
            1 => Some(Scenario::FailingOnlyCoverage),
            2 => Some(Scenario::WholeRunNegation),
            3 => Some(Scenario::SpecificOccurrences),
            4 => Some(Scenario::Mixed),
            5 => Some(Scenario::MultiplePredicates),
            _ => None,
        }
    }
}

impl Serialize for Scenario {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let n = u8::deserialize(d)?;
        Scenario::from_number(n).ok_or_else(|| D::Error::custom(format!("invalid scenario {n}")))
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Scenario{}", self.number())
    }
}

/// Per-test predicate occurrence counts over the whole suite (baseline runs).
#[derive(Debug, Clone)]
pub struct SuiteOccurrences {
    pub per_test: Vec<BTreeMap<PredicateId, u32>>,
    pub verdicts: Vec<Verdict>,
}

impl SuiteOccurrences {
    pub fn collect(program: &Program, suite: &TestSuite, config: &ExecConfig) -> Self {
        SuiteOccurrences {
            per_test: suite
                .cases
                .iter()
                .map(|t| count_occurrences(program, t, config).counts)
                .collect(),
            verdicts: suite.verdicts.clone(),
        }
    }

    fn count(&self, test: usize, predicate: PredicateId) -> u32 {
        self.per_test[test].get(&predicate).copied().unwrap_or(0)
    }
}

/// Classify a solution against the suite's occurrence profile.
///
/// For a single pair, a pattern "covers the whole run" of a failing test when
/// its selection equals every occurrence of that run, so a syntactic `first`
/// on single-occurrence runs classifies like `all`.
pub fn classify_scenario(solution: &Solution, occurrences: &SuiteOccurrences) -> Scenario {
    if solution.pairs.len() > 1 {
        return Scenario::MultiplePredicates;
    }
    let (p, pattern) = solution.pairs[0];

    let exercised_by_passing = occurrences
        .verdicts
        .iter()
        .enumerate()
        .any(|(t, v)| *v == Verdict::Pass && occurrences.count(t, p) > 0);
    if !exercised_by_passing {
        return Scenario::FailingOnlyCoverage;
    }

    let mut any_whole_run = false;
    let mut any_proper_subset = false;
    for (t, v) in occurrences.verdicts.iter().enumerate() {
        if *v != Verdict::Fail {
            continue;
        }
        let n = occurrences.count(t, p);
        if n == 0 {
            continue;
        }
        let selection = occurrences_for_pattern(pattern, n);
        if selection.len() == n as usize {
            any_whole_run = true;
        } else {
            any_proper_subset = true;
        }
    }
    match (any_whole_run, any_proper_subset) {
        (true, false) | (false, false) => Scenario::WholeRunNegation,
        (false, true) => Scenario::SpecificOccurrences,
        (true, true) => Scenario::Mixed,
    }
}
