//! Training-set assembly from captured snapshots.
//!
//! Every training test is re-executed with snapshot capture at the solution's
//! predicates. Failing tests run under the solution's negation plan so that
//! captured states follow the patched control flow — the states the deployed
//! oracle will actually see — and each snapshot's negated flag becomes its
//! label (NS when negated, DNS otherwise). Passing tests run unmodified and
//! contribute only DNS snapshots.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::minilang::{PredicateId, Program, TestSuite, Verdict};
use crate::runtime::{run_with_hooks, ExecConfig, Hooks};
use crate::search::Solution;

use super::schema::{build_schema, FeatureSchema};
use super::svm::TrainingSet;

#[derive(Debug, Error)]
pub enum CollectError {
    #[error("test {test_index} no longer reproduces its baseline verdict {expected:?} (got {found:?}); the baseline is stale")]
    StaleBaseline { test_index: usize, expected: Verdict, found: Verdict },
}

/// Collect per-predicate training sets over the given suite subset.
pub fn collect_training_data(
    program: &Program,
    suite: &TestSuite,
    training_indices: &[usize],
    solution: &Solution,
    config: &ExecConfig,
) -> Result<BTreeMap<PredicateId, TrainingSet>, CollectError> {
    let schemas: BTreeMap<PredicateId, FeatureSchema> = solution
        .pairs
        .iter()
        .map(|&(p, _)| (p, build_schema(program, p)))
        .collect();

    let mut sets: BTreeMap<PredicateId, TrainingSet> = solution
        .pairs
        .iter()
        .map(|&(p, _)| (p, TrainingSet { predicate: p, ..TrainingSet::default() }))
        .collect();

    for &t in training_indices {
        let test = &suite.cases[t];
        let baseline = suite.verdicts[t];
        let hooks = |plan| Hooks { plan, snapshot_schemas: Some(&schemas), deciders: None };

        let result = match baseline {
            Verdict::Pass => {
                let (result, _) = run_with_hooks(program, test, hooks(None), config);
                if result.verdict != Verdict::Pass {
                    return Err(CollectError::StaleBaseline {
                        test_index: t,
                        expected: Verdict::Pass,
                        found: result.verdict,
                    });
                }
                result
            }
            Verdict::Fail => {
                // Pre-run: occurrence counts anchor the plan's index sets, and
                // the verdict check catches stale baselines.
                let (baseline_run, counts) =
                    run_with_hooks(program, test, Hooks::default(), config);
                if baseline_run.verdict != Verdict::Fail {
                    return Err(CollectError::StaleBaseline {
                        test_index: t,
                        expected: Verdict::Fail,
                        found: baseline_run.verdict,
                    });
                }
                let plan = solution.plan_for_counts(&counts.counts);
                let (result, _) = run_with_hooks(program, test, hooks(Some(&plan)), config);
                result
            }
        };

        for snapshot in result.snapshots.as_deref().unwrap_or(&[]) {
            let set = sets.get_mut(&snapshot.predicate).expect("capture sites match solution");
            if snapshot.negated {
                set.ns.push(snapshot.values.clone());
            } else {
                set.dns.push(snapshot.values.clone());
            }
        }
    }
    Ok(sets)
}
