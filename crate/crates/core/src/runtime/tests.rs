use super::*;
use crate::graphs::build_cdg;
use crate::learner::schema::{build_schema, UNINITIALIZED_SENTINEL};
use crate::learner::svm::ClassifierModel;
use crate::minilang::{fnv1a64, parse, StatementId};
use crate::patcher::{PatchEntry, Provenance, TrainedPatch};
use crate::search::{Pattern, Scenario};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn program(src: &str) -> Program {
    parse(src).expect("test program parses")
}

fn case(args: &[i64], expected: &str) -> TestCase {
    TestCase::new(args.to_vec(), expected)
}

fn indices(vals: &[u32]) -> OccurrenceSelection {
    OccurrenceSelection::Indices(vals.iter().copied().collect::<BTreeSet<_>>())
}

const BUGGY_MAX: &str = "func main(a:int, b:int){ if (a > b) { print(b); } else { print(a); } }";

#[test]
fn straight_line_pass_no_events() {
    let p = program("func main(a:int){ print(a); }");
    let mut config = ExecConfig::default();
    config.record_events = true;
    let r = execute(&p, &case(&[7], "7\n"), &config);
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.failure_kind, FailureKind::None);
    assert_eq!(r.output, "7\n");
    assert_eq!(r.events.as_deref(), Some(&[][..]));
}

#[test]
fn branch_execution_emits_dependence_event() {
    let p = program("func main(a:int){ if (a < 0) { print(0); } else { print(a); } }");
    let mut config = ExecConfig::default();
    config.record_events = true;
    let r = execute(&p, &case(&[5], "5\n"), &config);
    assert_eq!(r.verdict, Verdict::Pass);
    let events = r.events.expect("recorded");
    // The else-branch print is statement 2, controlled by the if (statement 0).
    assert!(events
        .iter()
        .any(|e| e.parent == StatementId(0) && e.child == StatementId(2)));
}

#[test]
fn infinite_loop_hits_step_limit() {
    let p = program("func main(a:int){ while (true) { } print(a); }");
    let mut config = ExecConfig::default();
    config.step_budget = 1000;
    let r = execute(&p, &case(&[1], "1\n"), &config);
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.failure_kind, FailureKind::StepLimit);
    assert_eq!(r.steps, 1001);
}

#[test]
fn runtime_errors_fail_without_aborting() {
    let div = program("func main(a:int){ print(10 / a); }");
    let r = execute(&div, &case(&[0], "0\n"), &ExecConfig::default());
    assert_eq!(r.failure_kind, FailureKind::RuntimeError(RuntimeErrorKind::DivisionByZero));

    let oob = program("func main(a:int){ var xs: int[3]; print(xs[a]); }");
    let r = execute(&oob, &case(&[5], "0\n"), &ExecConfig::default());
    assert_eq!(r.failure_kind, FailureKind::RuntimeError(RuntimeErrorKind::IndexOutOfBounds));

    let overflow = program("func main(a:int){ print(a * a); }");
    let r = execute(&overflow, &case(&[4_000_000_000], "x\n"), &ExecConfig::default());
    assert_eq!(r.failure_kind, FailureKind::RuntimeError(RuntimeErrorKind::IntegerOverflow));

    let deep = program("func f(x:int): int { return f(x); } func main(a:int){ print(f(a)); }");
    let r = execute(&deep, &case(&[1], "1\n"), &ExecConfig::default());
    assert_eq!(r.failure_kind, FailureKind::RuntimeError(RuntimeErrorKind::CallDepthExceeded));
}

#[test]
fn occurrence_counts_include_final_false_evaluation() {
    // Loop body runs 3 times → guard evaluates 4 times (3 true + 1 false).
    let p = program(
        "func main(n:int){ var i: int = 0; while (i < n) { i = i + 1; } print(i); }",
    );
    let counts = count_occurrences(&p, &case(&[3], "3\n"), &ExecConfig::default());
    assert!(counts.completed);
    assert_eq!(counts.count(PredicateId(0)), 4);
}

#[test]
fn straight_line_has_no_occurrences() {
    let p = program("func main(a:int){ print(a); }");
    let counts = count_occurrences(&p, &case(&[1], "1\n"), &ExecConfig::default());
    assert!(counts.counts.is_empty());
}

#[test]
fn if_inside_loop_counts_once_per_iteration() {
    let p = program(
        "func main(n:int){ var i: int = 0; while (i < n) { if (i > 100) { print(i); } i = i + 1; } }",
    );
    let counts = count_occurrences(&p, &case(&[3], ""), &ExecConfig::default());
    assert_eq!(counts.count(PredicateId(0)), 4);
    assert_eq!(counts.count(PredicateId(1)), 3);
}

#[test]
fn counts_up_to_failure_point_carry_flag() {
    let p = program(
        "func main(n:int){ var i: int = 0; while (i < n) { print(10 / (2 - i)); i = i + 1; } }",
    );
    let counts = count_occurrences(&p, &case(&[5], ""), &ExecConfig::default());
    assert!(!counts.completed);
    // Guard evaluated for i = 0, 1, 2; the third body blew up.
    assert_eq!(counts.count(PredicateId(0)), 3);
}

#[test]
fn empty_plan_is_identity() {
    let p = program(BUGGY_MAX);
    let test = case(&[1, 2], "2\n");
    let mut config = ExecConfig::default();
    config.record_events = true;
    let baseline = execute(&p, &test, &config);
    let negated = execute_with_negation(&p, &test, &NegationPlan::new(), &config);
    assert_eq!(baseline, negated);
}

#[test]
fn negating_buggy_max_repairs_it() {
    let p = program(BUGGY_MAX);
    let test = case(&[1, 2], "2\n");
    assert_eq!(execute(&p, &test, &ExecConfig::default()).verdict, Verdict::Fail);

    let mut plan = NegationPlan::new();
    plan.set(PredicateId(0), OccurrenceSelection::All);
    let r = execute_with_negation(&p, &test, &plan, &ExecConfig::default());
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.output, "2\n");
}

#[test]
fn selecting_absent_occurrence_changes_nothing() {
    let p = program(BUGGY_MAX);
    let test = case(&[1, 2], "2\n");
    let mut plan = NegationPlan::new();
    plan.set(PredicateId(0), indices(&[2]));
    let r = execute_with_negation(&p, &test, &plan, &ExecConfig::default());
    assert_eq!(r, execute(&p, &test, &ExecConfig::default()));
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn execution_is_deterministic() {
    let p = program(
        "func main(n:int){ var i: int = 0; var s: int = 0; while (i < n) { s = s + i; i = i + 1; } print(s); }",
    );
    let test = case(&[10], "45\n");
    let mut config = ExecConfig::default();
    config.record_events = true;
    config.record_coverage = true;
    let a = execute(&p, &test, &config);
    let b = execute(&p, &test, &config);
    assert_eq!(a, b);
}

#[test]
fn stacked_plan_and_memorizing_decider_restore_baseline() {
    // Negating the same occurrences twice is the identity: the plan flips
    // them, the decider flips them back.
    let p = program(
        "func main(n:int){ var i: int = 0; while (i < n) { if (i % 2 == 0) { print(i); } i = i + 1; } }",
    );
    let test = case(&[4], "0\n2\n");
    let config = ExecConfig::default();
    let baseline = execute(&p, &test, &config);
    assert_eq!(baseline.verdict, Verdict::Pass);

    let selection = indices(&[1, 3]);
    let mut plan = NegationPlan::new();
    plan.set(PredicateId(1), selection.clone());

    let schema = build_schema(&p, PredicateId(1));
    let decider = PlanDecider(selection);
    let mut deciders: std::collections::BTreeMap<_, (_, &dyn NegationDecider)> =
        std::collections::BTreeMap::new();
    deciders.insert(PredicateId(1), (&schema, &decider as &dyn NegationDecider));

    let (stacked, _) = run_with_hooks(
        &p,
        &test,
        Hooks { plan: Some(&plan), deciders: Some(&deciders), snapshot_schemas: None },
        &config,
    );
    assert_eq!(stacked.output, baseline.output);
    assert_eq!(stacked.verdict, baseline.verdict);

    // Sanity: the plan alone does change behavior.
    let negated = execute_with_negation(&p, &test, &plan, &config);
    assert_ne!(negated.output, baseline.output);
}

#[test]
fn plan_and_lookup_oracle_agree() {
    let p = program(
        "func main(n:int){ var i: int = 0; while (i < n) { if (i % 2 == 0) { print(i); } else { print(0 - i); } i = i + 1; } }",
    );
    let config = ExecConfig::default();
    for args in [[0i64], [1], [3], [6]] {
        let test = case(&args, "");
        for sel in [
            OccurrenceSelection::All,
            indices(&[1]),
            indices(&[2, 3]),
            indices(&[1, 4, 5]),
        ] {
            for pid in [PredicateId(0), PredicateId(1)] {
                let mut plan = NegationPlan::new();
                plan.set(pid, sel.clone());
                let planned = execute_with_negation(&p, &test, &plan, &config);

                let schema = build_schema(&p, pid);
                let decider = PlanDecider(sel.clone());
                let mut deciders: std::collections::BTreeMap<_, (_, &dyn NegationDecider)> =
                    std::collections::BTreeMap::new();
                deciders.insert(pid, (&schema, &decider as &dyn NegationDecider));
                let via_oracle = execute_with_deciders(&p, &test, &deciders, &config);

                assert_eq!(planned.output, via_oracle.output);
                assert_eq!(planned.verdict, via_oracle.verdict);
                assert_eq!(planned.steps, via_oracle.steps);
            }
        }
    }
}

fn constant_patch(p: &Program, predicate: PredicateId, negate: bool) -> TrainedPatch {
    TrainedPatch {
        program_digest: p.source_digest,
        entries: vec![PatchEntry { predicate, model: ClassifierModel::Constant { negate } }],
        provenance: Provenance {
            pairs: vec![(predicate, Pattern::All)],
            scenario: Scenario::WholeRunNegation,
            training_fraction: 1.0,
            seed: 42,
            tool_version: crate::TOOL_VERSION.to_string(),
        },
    }
}

#[test]
fn constant_dont_negate_patch_is_identity() {
    let p = program(BUGGY_MAX);
    let test = case(&[1, 2], "2\n");
    let config = ExecConfig::default();
    let baseline = execute(&p, &test, &config);
    let patched = execute_with_oracle(&p, &test, &constant_patch(&p, PredicateId(0), false), &config)
        .expect("digest matches");
    assert_eq!(patched.output, baseline.output);
    assert_eq!(patched.verdict, baseline.verdict);
}

#[test]
fn constant_negate_patch_equals_plan_all() {
    let p = program(BUGGY_MAX);
    let test = case(&[1, 2], "2\n");
    let config = ExecConfig::default();
    let mut plan = NegationPlan::new();
    plan.set(PredicateId(0), OccurrenceSelection::All);
    let planned = execute_with_negation(&p, &test, &plan, &config);
    let patched = execute_with_oracle(&p, &test, &constant_patch(&p, PredicateId(0), true), &config)
        .expect("digest matches");
    assert_eq!(patched.output, planned.output);
    assert_eq!(patched.verdict, planned.verdict);
}

#[test]
fn digest_mismatch_refuses_to_run() {
    let p = program(BUGGY_MAX);
    // Flip one byte of the source: 1-space indent becomes 2.
    let mutated = program(&BUGGY_MAX.replace("a > b", "a > 1"));
    let patch = constant_patch(&p, PredicateId(0), false);
    let err = execute_with_oracle(&mutated, &case(&[1, 2], "2\n"), &patch, &ExecConfig::default())
        .unwrap_err();
    assert!(matches!(err, OracleRunError::DigestMismatch { .. }));
}

#[test]
fn oracle_records_decisions_in_snapshot_stream() {
    let p = program(BUGGY_MAX);
    let test = case(&[1, 2], "2\n");
    let r = execute_with_oracle(&p, &test, &constant_patch(&p, PredicateId(0), true), &ExecConfig::default())
        .expect("digest matches");
    let snapshots = r.snapshots.expect("oracle path records snapshots");
    assert_eq!(snapshots.len(), 1);
    assert_eq!(snapshots[0].predicate, PredicateId(0));
    assert_eq!(snapshots[0].occurrence, 1);
    assert!(snapshots[0].negated);
}

#[test]
fn snapshots_follow_schema_with_sentinel_and_digests() {
    let src = r#"
var g: int = 11;
func main(a:int){
  var s: string = "hi";
  if (a > g) {
    var late: int = 5;
    print(late);
  } else {
    print(a);
  }
}
"#;
    let p = program(src);
    let pid = PredicateId(0);
    let schema = build_schema(&p, pid);
    let names: Vec<&str> = schema.descriptors.iter().map(|d| d.name.as_str()).collect();
    // Category 1: a, g (used in the condition); category 3: late, s.
    assert_eq!(names, vec!["a", "g", "late", "s"]);

    let mut schemas = std::collections::BTreeMap::new();
    schemas.insert(pid, schema);
    let (r, _) = run_with_hooks(
        &p,
        &case(&[3], "3\n"),
        Hooks { snapshot_schemas: Some(&schemas), ..Hooks::default() },
        &ExecConfig::default(),
    );
    let snaps = r.snapshots.expect("captured");
    assert_eq!(snaps.len(), 1);
    let values = &snaps[0].values;
    assert_eq!(values[0], 3); // a
    assert_eq!(values[1], 11); // g
    assert_eq!(values[2], UNINITIALIZED_SENTINEL); // late: declared after capture
    assert_eq!(values[3], fnv1a64(b"hi") as i64); // s: string digest
    assert!(!snaps[0].negated);
}

#[test]
fn call_results_in_condition_are_captured() {
    let src = "
func h(x:int): int { return x * 2; }
func main(a:int){
  if (h(a) > 4) { print(1); } else { print(0); }
}";
    let p = program(src);
    let pid = PredicateId(0);
    let schema = build_schema(&p, pid);
    assert!(schema.descriptors.iter().any(|d| d.name == "call:h#0"));

    let mut schemas = std::collections::BTreeMap::new();
    schemas.insert(pid, schema.clone());
    let (r, _) = run_with_hooks(
        &p,
        &case(&[3], "1\n"),
        Hooks { snapshot_schemas: Some(&schemas), ..Hooks::default() },
        &ExecConfig::default(),
    );
    let snaps = r.snapshots.expect("captured");
    let idx = schema.descriptors.iter().position(|d| d.name == "call:h#0").unwrap();
    assert_eq!(snaps[0].values[idx], 6);
}

proptest! {
    // Every emitted (parent, child) pair is an edge of the static CDG.
    #[test]
    fn events_are_sound_against_static_cdg(n in 0i64..12, m in 0i64..12) {
        let p = program(
            "func main(n:int, m:int){
               var i: int = 0;
               while (i < n) {
                 if (i % 2 == 0) { print(i); } else { print(i + m); }
                 var j: int = 0;
                 while (j < m) { j = j + 1; }
                 i = i + 1;
               }
               print(i);
             }",
        );
        let cdg = build_cdg(&p).unwrap();
        let mut config = ExecConfig::default();
        config.record_events = true;
        let r = execute(&p, &case(&[n, m], ""), &config);
        let events = r.events.expect("recorded");
        let mut last = 0u64;
        for e in &events {
            prop_assert!(cdg.edges.contains(&(e.parent, e.child)),
                "event ({},{}) is not a static edge", e.parent, e.child);
            prop_assert!(e.timestamp > last, "timestamps strictly increase");
            last = e.timestamp;
        }
    }
}

#[test]
fn loop_reevaluation_emits_self_edge() {
    let p = program("func main(n:int){ var i: int = 0; while (i < n) { i = i + 1; } }");
    let mut config = ExecConfig::default();
    config.record_events = true;
    let r = execute(&p, &case(&[2], ""), &config);
    let events = r.events.expect("recorded");
    let guard = StatementId(1);
    let self_edges =
        events.iter().filter(|e| e.parent == guard && e.child == guard).count();
    // Guard evaluates 3 times; the 2nd and 3rd are re-evaluations.
    assert_eq!(self_edges, 2);
}

#[test]
fn loop_guard_reevaluation_attributes_to_inner_branch_when_not_self_dependent() {
    // The body can return, so the guard has no static self-edge; its
    // re-evaluation is attributed to the inner predicate that looped back.
    let p = program(
        "func main(n:int){
           var i: int = 0;
           while (i < n) {
             if (i > 10) { return; }
             i = i + 1;
           }
           print(i);
         }",
    );
    let cdg = build_cdg(&p).unwrap();
    let guard = StatementId(1);
    let inner = StatementId(2);
    assert!(!cdg.edges.contains(&(guard, guard)), "no self edge when the body may return");
    assert!(cdg.edges.contains(&(inner, guard)), "the back edge hangs off the inner branch");

    let mut config = ExecConfig::default();
    config.record_events = true;
    let r = execute(&p, &case(&[2], "2\n"), &config);
    assert_eq!(r.verdict, Verdict::Pass);
    let events = r.events.expect("recorded");
    for e in &events {
        assert!(cdg.edges.contains(&(e.parent, e.child)), "unsound event {e:?}");
    }
    // Both re-evaluations of the guard are attributed to the inner predicate.
    let reattributed =
        events.iter().filter(|e| e.parent == inner && e.child == guard).count();
    assert_eq!(reattributed, 2);
}

#[test]
fn short_circuit_skips_call_capture() {
    let src = "
func h(x:int): int { return x * 3; }
func main(a:int){
  if (a > 0 && h(a) > 2) { print(1); } else { print(0); }
}";
    let p = program(src);
    let pid = PredicateId(0);
    let schema = build_schema(&p, pid);
    let idx = schema.descriptors.iter().position(|d| d.name == "call:h#0").unwrap();
    let mut schemas = std::collections::BTreeMap::new();
    schemas.insert(pid, schema);

    // Left conjunct false: the call never runs and its feature is the sentinel.
    let (r, _) = run_with_hooks(
        &p,
        &case(&[-1], "0\n"),
        Hooks { snapshot_schemas: Some(&schemas), ..Hooks::default() },
        &ExecConfig::default(),
    );
    let snaps = r.snapshots.expect("captured");
    assert_eq!(snaps[0].values[idx], UNINITIALIZED_SENTINEL);

    // Left conjunct true: the call result is captured.
    let (r, _) = run_with_hooks(
        &p,
        &case(&[2], "1\n"),
        Hooks { snapshot_schemas: Some(&schemas), ..Hooks::default() },
        &ExecConfig::default(),
    );
    let snaps = r.snapshots.expect("captured");
    assert_eq!(snaps[0].values[idx], 6);
}
