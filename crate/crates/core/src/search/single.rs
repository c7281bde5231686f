//! Single- and multiple-predicate repair search.
//!
//! The single search tries every (suspicious predicate, failing test, pattern)
//! combination under `execute_with_negation`, recording which failing tests
//! each (predicate, pattern) pair repairs. Occurrence counts come from one
//! unmodified pre-run per failing test, so each failing test is executed twice
//! per effective trial. Trials whose occurrence selection is empty are skipped:
//! they cannot change behavior.
//!
//! The multiple search greedily covers the failing set with (predicate,
//! pattern) columns once no single pair repairs everything.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::minilang::{PredicateId, Program, TestSuite};
use crate::runtime::{
    count_occurrences, execute_with_negation, ExecConfig, NegationPlan, OccurrenceSelection,
};

use super::pattern::{occurrences_for_pattern, Pattern, PATTERNS};

#[derive(Debug, Clone, Default)]
pub struct SearchConfig {
    pub exec: ExecConfig,
}

/// Which failing tests each pattern repairs for one predicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairRecord {
    pub predicate: PredicateId,
    pub repairs: BTreeMap<Pattern, BTreeSet<usize>>,
}

impl RepairRecord {
    pub fn repaired_by(&self, pattern: Pattern) -> Option<&BTreeSet<usize>> {
        self.repairs.get(&pattern)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Completeness {
    Full,
    Partial,
}

/// A repair candidate: distinct predicates, each following a single pattern,
/// and the failing tests they collectively repair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub pairs: Vec<(PredicateId, Pattern)>,
    /// Indices (into the suite) of failing tests repaired collectively.
    pub fixed: BTreeSet<usize>,
    pub completeness: Completeness,
}

impl Solution {
    pub fn is_full(&self) -> bool {
        self.completeness == Completeness::Full
    }

    /// The negation plan this solution prescribes for a run in which each
    /// predicate evaluates the given number of times.
    pub fn plan_for_counts(&self, counts: &BTreeMap<PredicateId, u32>) -> NegationPlan {
        let mut plan = NegationPlan::new();
        for &(p, pattern) in &self.pairs {
            let n = counts.get(&p).copied().unwrap_or(0);
            let indices = occurrences_for_pattern(pattern, n);
            if !indices.is_empty() {
                plan.set(p, OccurrenceSelection::Indices(indices));
            }
        }
        plan
    }
}

/// Try every (predicate, pattern) pair against every failing test. Returns all
/// FULL and PARTIAL single-pair solutions plus the per-predicate repair
/// records that feed the multiple-predicate search.
///
/// `pred_list` is the suspicious-predicate list, each with its causal-effect
/// estimate; order and ties elsewhere use the estimate.
pub fn single_predicate_search(
    program: &Program,
    pred_list: &[(PredicateId, f64)],
    suite: &TestSuite,
    config: &SearchConfig,
) -> (Vec<Solution>, Vec<RepairRecord>) {
    let t_fail = suite.failing_indices();
    let tau: BTreeMap<PredicateId, f64> = pred_list.iter().copied().collect();

    // One unmodified pre-run per failing test gives every predicate's
    // occurrence count for that run.
    let counts: BTreeMap<usize, BTreeMap<PredicateId, u32>> = t_fail
        .iter()
        .map(|&t| (t, count_occurrences(program, &suite.cases[t], &config.exec).counts))
        .collect();

    let mut records = Vec::new();
    for &(p, _) in pred_list {
        let mut repairs: BTreeMap<Pattern, BTreeSet<usize>> = BTreeMap::new();
        for &t in &t_fail {
            let n = counts[&t].get(&p).copied().unwrap_or(0);
            // Distinct patterns often select the same occurrences (n = 1 makes
            // all, first, last, first+last, odd coincide); run each index set
            // once and credit every pattern that produced it.
            let mut by_selection: BTreeMap<BTreeSet<u32>, bool> = BTreeMap::new();
            for pattern in PATTERNS {
                let selection = occurrences_for_pattern(pattern, n);
                if selection.is_empty() {
                    continue;
                }
                let repaired = *by_selection.entry(selection.clone()).or_insert_with(|| {
                    let mut plan = NegationPlan::new();
                    plan.set(p, OccurrenceSelection::Indices(selection));
                    let result =
                        execute_with_negation(program, &suite.cases[t], &plan, &config.exec);
                    result.verdict == crate::minilang::Verdict::Pass
                });
                if repaired {
                    repairs.entry(pattern).or_default().insert(t);
                }
            }
        }
        if !repairs.is_empty() {
            records.push(RepairRecord { predicate: p, repairs });
        }
    }

    let mut solutions = Vec::new();
    for record in &records {
        for (&pattern, fixed) in &record.repairs {
            let completeness = if fixed.len() == t_fail.len() {
                Completeness::Full
            } else {
                Completeness::Partial
            };
            solutions.push(Solution {
                pairs: vec![(record.predicate, pattern)],
                fixed: fixed.clone(),
                completeness,
            });
        }
    }
    sort_solutions(&mut solutions, &tau);
    (solutions, records)
}

/// Deterministic solution order: most tests fixed first, then simpler pattern,
/// then higher causal effect, then lower predicate id.
pub fn sort_solutions(solutions: &mut [Solution], tau: &BTreeMap<PredicateId, f64>) {
    solutions.sort_by(|a, b| {
        b.fixed.len().cmp(&a.fixed.len()).then_with(|| {
            let (pa, ta) = sort_key(a, tau);
            let (pb, tb) = sort_key(b, tau);
            pa.cmp(&pb)
                .then_with(|| tb.partial_cmp(&ta).expect("causal effects are finite"))
                .then_with(|| a.pairs.cmp(&b.pairs))
        })
    });
}

fn sort_key(solution: &Solution, tau: &BTreeMap<PredicateId, f64>) -> (usize, f64) {
    let rank = solution
        .pairs
        .iter()
        .map(|(_, pattern)| pattern.simplicity_rank())
        .min()
        .unwrap_or(usize::MAX);
    let best_tau = solution
        .pairs
        .iter()
        .map(|(p, _)| tau.get(p).copied().unwrap_or(f64::NEG_INFINITY))
        .fold(f64::NEG_INFINITY, f64::max);
    (rank, best_tau)
}

/// Greedy set cover over the boolean matrix of failing tests × (predicate,
/// pattern) columns. Each iteration picks the column fixing the most
/// still-broken tests (ties: simpler pattern, higher causal effect, lower
/// predicate id); a selected predicate's remaining columns are dropped so each
/// predicate follows a single pattern. Returns `None` when no column repairs
/// anything.
pub fn multiple_predicate_search(
    records: &[RepairRecord],
    t_fail: &BTreeSet<usize>,
    tau: &BTreeMap<PredicateId, f64>,
) -> Option<Solution> {
    let mut columns: Vec<(PredicateId, Pattern, &BTreeSet<usize>)> = records
        .iter()
        .flat_map(|r| r.repairs.iter().map(move |(&pat, set)| (r.predicate, pat, set)))
        .collect();

    let mut pairs = Vec::new();
    let mut fixed: BTreeSet<usize> = BTreeSet::new();
    while fixed.len() < t_fail.len() && !columns.is_empty() {
        let best = columns
            .iter()
            .map(|&(p, pattern, set)| {
                let gain = set.difference(&fixed).count();
                (gain, p, pattern, set)
            })
            .max_by(|a, b| {
                a.0.cmp(&b.0)
                    .then_with(|| b.2.simplicity_rank().cmp(&a.2.simplicity_rank()))
                    .then_with(|| {
                        let ta = tau.get(&a.1).copied().unwrap_or(f64::NEG_INFINITY);
                        let tb = tau.get(&b.1).copied().unwrap_or(f64::NEG_INFINITY);
                        ta.partial_cmp(&tb).expect("causal effects are finite")
                    })
                    .then_with(|| b.1.cmp(&a.1))
            })?;
        let (gain, p, pattern, set) = best;
        if gain == 0 {
            break;
        }
        pairs.push((p, pattern));
        fixed.extend(set.iter().copied());
        columns.retain(|&(cp, _, _)| cp != p);
    }

    if pairs.is_empty() {
        return None;
    }
    let completeness =
        if fixed == *t_fail { Completeness::Full } else { Completeness::Partial };
    Some(Solution { pairs, fixed, completeness })
}
