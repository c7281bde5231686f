//! Accuracy evaluation: split the suite, train on one part, and measure how
//! many held-out tests the patched program handles properly — failing tests
//! that now pass and passing tests that stay intact.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::minilang::{PredicateId, Program, TestSuite, Verdict};
use crate::patcher::{build_patch, TrainedPatch};
use crate::runtime::{execute_with_oracle, ExecConfig};
use crate::search::{Scenario, Solution};
use thiserror::Error;

use super::collect::{collect_training_data, CollectError};
use super::svm::{train, ClassifierModel, TrainConfig};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("suite too small to stratify at fraction {fraction}: training would consume all {total} tests; at least {minimum} tests are required")]
    SuiteTooSmall { fraction: f64, total: usize, minimum: usize },
    #[error("suite has no failing tests")]
    NoFailingTests,
    #[error(transparent)]
    Collect(#[from] CollectError),
    #[error(transparent)]
    Patch(#[from] crate::patcher::PatchError),
    #[error(transparent)]
    Oracle(#[from] crate::runtime::OracleRunError),
}

/// Per-fraction accuracy report.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub fraction: f64,
    pub seed: u64,
    pub training_failing: usize,
    pub training_passing: usize,
    pub testing_total: usize,
    /// Fraction of testing tests handled properly.
    pub accuracy: f64,
    /// Held-out failing tests that now pass.
    pub failing_fixed: usize,
    pub failing_total: usize,
    /// Held-out passing tests that stayed intact.
    pub passing_intact: usize,
    pub passing_total: usize,
}

/// Train classifiers for a solution on the given subset and assemble a patch.
#[allow(clippy::too_many_arguments)]
pub fn train_solution(
    program: &Program,
    suite: &TestSuite,
    training_indices: &[usize],
    solution: &Solution,
    scenario: Scenario,
    fraction: f64,
    exec: &ExecConfig,
    train_config: &TrainConfig,
) -> Result<TrainedPatch, EvalError> {
    let sets = collect_training_data(program, suite, training_indices, solution, exec)?;
    let models: Vec<ClassifierModel> = solution
        .pairs
        .iter()
        .map(|(p, _)| train(&sets[p], train_config))
        .collect();
    let patch = build_patch(program, solution, models, scenario, fraction, train_config.seed)?;
    Ok(patch)
}

/// Stratified split plus train/deploy/measure for one training fraction.
/// Fraction 1.0 trains and tests on the full suite (the maximum-accuracy
/// indicator mode).
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    program: &Program,
    suite: &TestSuite,
    solution: &Solution,
    scenario: Scenario,
    fraction: f64,
    seed: u64,
    exec: &ExecConfig,
    train_config: &TrainConfig,
) -> Result<EvalReport, EvalError> {
    assert!(fraction > 0.0 && fraction <= 1.0, "training fraction must lie in (0, 1]");
    let failing = suite.failing_indices();
    let passing = suite.passing_indices();
    if failing.is_empty() {
        return Err(EvalError::NoFailingTests);
    }

    let (train_idx, test_idx) = if fraction >= 1.0 {
        let all: Vec<usize> = (0..suite.cases.len()).collect();
        (all.clone(), all)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failing_pool = failing.clone();
        let mut passing_pool = passing.clone();
        failing_pool.shuffle(&mut rng);
        passing_pool.shuffle(&mut rng);
        // Stratified: at least one failing and (when available) one passing
        // test in training.
        let n_fail = ((fraction * failing.len() as f64).round() as usize).clamp(1, failing.len());
        let n_pass = if passing.is_empty() {
            0
        } else {
            ((fraction * passing.len() as f64).round() as usize).clamp(1, passing.len())
        };
        let train_idx: Vec<usize> = failing_pool[..n_fail]
            .iter()
            .chain(&passing_pool[..n_pass])
            .copied()
            .collect();
        let test_idx: Vec<usize> = (0..suite.cases.len())
            .filter(|i| !train_idx.contains(i))
            .collect();
        if test_idx.is_empty() {
            return Err(EvalError::SuiteTooSmall {
                fraction,
                total: suite.cases.len(),
                minimum: train_idx.len() + 1,
            });
        }
        (train_idx, test_idx)
    };

    let mut train_sorted = train_idx.clone();
    train_sorted.sort_unstable();
    let patch = train_solution(
        program,
        suite,
        &train_sorted,
        solution,
        scenario,
        fraction,
        exec,
        train_config,
    )?;

    measure(program, suite, &patch, &train_idx, &test_idx, fraction, seed, exec)
}

#[allow(clippy::too_many_arguments)]
fn measure(
    program: &Program,
    suite: &TestSuite,
    patch: &TrainedPatch,
    train_idx: &[usize],
    test_idx: &[usize],
    fraction: f64,
    seed: u64,
    exec: &ExecConfig,
) -> Result<EvalReport, EvalError> {
    let mut failing_fixed = 0;
    let mut failing_total = 0;
    let mut passing_intact = 0;
    let mut passing_total = 0;
    for &t in test_idx {
        let result = execute_with_oracle(program, &suite.cases[t], patch, exec)?;
        match suite.verdicts[t] {
            Verdict::Fail => {
                failing_total += 1;
                if result.verdict == Verdict::Pass {
                    failing_fixed += 1;
                }
            }
            Verdict::Pass => {
                passing_total += 1;
                if result.verdict == Verdict::Pass {
                    passing_intact += 1;
                }
            }
        }
    }
    let proper = failing_fixed + passing_intact;
    Ok(EvalReport {
        fraction,
        seed,
        training_failing: train_idx
            .iter()
            .filter(|&&t| suite.verdicts[t] == Verdict::Fail)
            .count(),
        training_passing: train_idx
            .iter()
            .filter(|&&t| suite.verdicts[t] == Verdict::Pass)
            .count(),
        testing_total: test_idx.len(),
        accuracy: proper as f64 / test_idx.len() as f64,
        failing_fixed,
        failing_total,
        passing_intact,
        passing_total,
    })
}

/// Which predicates a patch covers, in entry order (used by reports).
pub fn patched_predicates(patch: &TrainedPatch) -> Vec<PredicateId> {
    patch.entries.iter().map(|e| e.predicate).collect()
}
