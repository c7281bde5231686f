//! Deterministic instrumented interpreter.
//!
//! Executes one test at a time, emitting dynamic control-dependence events,
//! enforcing negation plans, consulting negation deciders (classifiers), and
//! capturing state snapshots at predicate sites. Runtime errors and step-limit
//! exhaustion become FAIL verdicts; they never abort the calling harness.
//!
//! Negation is an exclusive-or on the evaluated condition, so negating the
//! same occurrence through both an active plan and a decider restores the
//! original branch.

mod interp;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::learner::schema::FeatureSchema;
use crate::minilang::{PredicateId, Program, StatementId, TestCase, TestSuite, Verdict};
use crate::patcher::TrainedPatch;
use thiserror::Error;

/// One dynamic control-dependence event: at `timestamp`, statement `child`
/// executed under controlling predicate `parent`. (parent, child) is always an
/// edge of the static control dependence graph.
///
/// The parent of an execution of s is the most recently executed static
/// parent of s; a loop guard's re-evaluation therefore emits the self-edge.
/// If no static parent of s has executed yet, no event is emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdEvent {
    pub timestamp: u64,
    pub parent: StatementId,
    pub child: StatementId,
}

/// Which occurrences of a predicate a plan negates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OccurrenceSelection {
    All,
    /// 1-based occurrence indices.
    Indices(std::collections::BTreeSet<u32>),
}

impl OccurrenceSelection {
    pub fn contains(&self, occurrence: u32) -> bool {
        match self {
            OccurrenceSelection::All => true,
            OccurrenceSelection::Indices(set) => set.contains(&occurrence),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            OccurrenceSelection::All => false,
            OccurrenceSelection::Indices(set) => set.is_empty(),
        }
    }
}

/// Maps predicates to the occurrence indices at which their condition is
/// inverted. Indices are 1-based; index 0 is rejected at insertion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegationPlan {
    map: BTreeMap<PredicateId, OccurrenceSelection>,
}

impl NegationPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, predicate: PredicateId, selection: OccurrenceSelection) {
        if let OccurrenceSelection::Indices(set) = &selection {
            assert!(!set.contains(&0), "occurrence indices are 1-based");
        }
        self.map.insert(predicate, selection);
    }

    pub fn selection(&self, predicate: PredicateId) -> Option<&OccurrenceSelection> {
        self.map.get(&predicate)
    }

    pub fn selects(&self, predicate: PredicateId, occurrence: u32) -> bool {
        self.map.get(&predicate).is_some_and(|s| s.contains(occurrence))
    }

    pub fn predicates(&self) -> impl Iterator<Item = PredicateId> + '_ {
        self.map.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Decides, immediately before a predicate evaluation, whether to negate it.
/// Classifier models implement this over the featurized snapshot; test
/// doubles may key on the occurrence index instead.
pub trait NegationDecider {
    fn should_negate(&self, occurrence: u32, features: &[i64]) -> bool;
}

/// A decider that memorizes an occurrence selection, ignoring program state.
/// Used to show plan/oracle equivalence.
#[derive(Debug, Clone)]
pub struct PlanDecider(pub OccurrenceSelection);

impl NegationDecider for PlanDecider {
    fn should_negate(&self, occurrence: u32, _features: &[i64]) -> bool {
        self.0.contains(occurrence)
    }
}

/// Captured program state at one predicate evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub predicate: PredicateId,
    /// 1-based index of this evaluation within the run.
    pub occurrence: u32,
    /// Numeric features in the predicate's schema order.
    pub values: Vec<i64>,
    /// Whether this evaluation was inverted (by plan and/or decider).
    pub negated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuntimeErrorKind {
    DivisionByZero,
    RemainderByZero,
    IntegerOverflow,
    IndexOutOfBounds,
    MissingReturnValue,
    CallDepthExceeded,
    ArgumentCountMismatch,
}

impl std::fmt::Display for RuntimeErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RuntimeErrorKind::DivisionByZero => "division by zero",
            RuntimeErrorKind::RemainderByZero => "remainder by zero",
            RuntimeErrorKind::IntegerOverflow => "integer overflow",
            RuntimeErrorKind::IndexOutOfBounds => "array index out of bounds",
            RuntimeErrorKind::MissingReturnValue => "function ended without returning a value",
            RuntimeErrorKind::CallDepthExceeded => "call depth exceeded",
            RuntimeErrorKind::ArgumentCountMismatch => "argument count mismatch",
        };
        f.write_str(s)
    }
}

/// Why an execution failed, if it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    None,
    WrongOutput,
    RuntimeError(RuntimeErrorKind),
    StepLimit,
}

/// Outcome of one instrumented execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionResult {
    pub verdict: Verdict,
    pub output: String,
    pub events: Option<Vec<CdEvent>>,
    pub snapshots: Option<Vec<StateSnapshot>>,
    pub steps: u64,
    pub failure_kind: FailureKind,
    /// Per-statement execution flags, recorded when requested.
    pub coverage: Option<Vec<bool>>,
}

/// Execution limits and which streams to record.
#[derive(Debug, Clone)]
pub struct ExecConfig {
    pub step_budget: u64,
    /// Nested-call limit; exceeding it is a runtime error rather than a
    /// harness abort.
    pub max_call_depth: usize,
    pub record_events: bool,
    pub record_coverage: bool,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            step_budget: 1_000_000,
            max_call_depth: 256,
            record_events: false,
            record_coverage: false,
        }
    }
}

/// Optional hooks for one run: a negation plan, per-predicate deciders, and
/// snapshot capture sites. Plan and decider compose by exclusive-or.
#[derive(Default)]
pub struct Hooks<'a> {
    pub plan: Option<&'a NegationPlan>,
    pub deciders: Option<&'a BTreeMap<PredicateId, (&'a FeatureSchema, &'a dyn NegationDecider)>>,
    pub snapshot_schemas: Option<&'a BTreeMap<PredicateId, FeatureSchema>>,
}

/// Per-predicate evaluation counts of one run. `completed` is false when the
/// run ended in a runtime error or hit the step limit; counts then cover the
/// prefix up to the failure point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceCounts {
    pub counts: BTreeMap<PredicateId, u32>,
    pub completed: bool,
}

impl OccurrenceCounts {
    pub fn count(&self, predicate: PredicateId) -> u32 {
        self.counts.get(&predicate).copied().unwrap_or(0)
    }
}

#[derive(Debug, Error)]
pub enum OracleRunError {
    #[error("patch digest {patch:#018x} does not match program digest {program:#018x}; refusing to run")]
    DigestMismatch { patch: u64, program: u64 },
}

/// Execute one test with the given hooks, also returning per-predicate
/// occurrence counts.
pub fn run_with_hooks(
    program: &Program,
    test: &TestCase,
    hooks: Hooks<'_>,
    config: &ExecConfig,
) -> (ExecutionResult, OccurrenceCounts) {
    interp::run(program, test, hooks, config)
}

/// Execute one test with no hooks.
pub fn execute(program: &Program, test: &TestCase, config: &ExecConfig) -> ExecutionResult {
    run_with_hooks(program, test, Hooks::default(), config).0
}

/// Count predicate evaluations of an unmodified run. Every evaluation counts,
/// including a loop guard's final false one. This pre-run is how patterns
/// anchored on the last occurrence know the total before the enforcement run.
pub fn count_occurrences(program: &Program, test: &TestCase, config: &ExecConfig) -> OccurrenceCounts {
    run_with_hooks(program, test, Hooks::default(), config).1
}

/// Execute under a negation plan: before the i-th evaluation of predicate p,
/// the evaluated condition is inverted iff i is selected by the plan.
pub fn execute_with_negation(
    program: &Program,
    test: &TestCase,
    plan: &NegationPlan,
    config: &ExecConfig,
) -> ExecutionResult {
    for p in plan.predicates() {
        assert!(
            p.index() < program.predicate_count(),
            "plan references predicate {p} outside the program"
        );
    }
    run_with_hooks(program, test, Hooks { plan: Some(plan), ..Hooks::default() }, config).0
}

/// Execute under a trained patch: before each evaluation of a patched
/// predicate, the state snapshot is captured, featurized, and passed to the
/// patch's classifier; the predicate is inverted iff the classifier says so.
/// The decision is recorded in the snapshot stream.
pub fn execute_with_oracle(
    program: &Program,
    test: &TestCase,
    patch: &TrainedPatch,
    config: &ExecConfig,
) -> Result<ExecutionResult, OracleRunError> {
    if patch.program_digest != program.source_digest {
        return Err(OracleRunError::DigestMismatch {
            patch: patch.program_digest,
            program: program.source_digest,
        });
    }
    let schemas: Vec<FeatureSchema> = patch
        .entries
        .iter()
        .map(|e| crate::learner::schema::build_schema(program, e.predicate))
        .collect();
    let deciders: BTreeMap<PredicateId, (&FeatureSchema, &dyn NegationDecider)> = patch
        .entries
        .iter()
        .zip(&schemas)
        .map(|(e, schema)| (e.predicate, (schema, &e.model as &dyn NegationDecider)))
        .collect();
    Ok(run_with_hooks(
        program,
        test,
        Hooks { deciders: Some(&deciders), ..Hooks::default() },
        config,
    )
    .0)
}

/// Execute with explicit per-predicate deciders; the hook path shared with
/// [`execute_with_oracle`].
pub fn execute_with_deciders(
    program: &Program,
    test: &TestCase,
    deciders: &BTreeMap<PredicateId, (&FeatureSchema, &dyn NegationDecider)>,
    config: &ExecConfig,
) -> ExecutionResult {
    run_with_hooks(program, test, Hooks { deciders: Some(deciders), ..Hooks::default() }, config).0
}

/// Run every case of a suite unmodified and record baseline verdicts.
pub fn run_baseline(program: &Program, cases: Vec<TestCase>, config: &ExecConfig) -> TestSuite {
    let verdicts = cases
        .iter()
        .map(|t| execute(program, t, config).verdict)
        .collect();
    TestSuite { cases, verdicts }
}

#[cfg(test)]
mod tests;
