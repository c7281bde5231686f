//! The iterative-deepening localization loop and causal refinement.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use crate::graphs::{build_cdg, enumerate_chains, Cdg, Chain, DEFAULT_MAX_STATIC_CHAINS};
use crate::minilang::{PredicateId, Program, StatementId, TestSuite, Verdict};
use crate::runtime::ExecConfig;

use super::causal::{causal_effect, CausalModelFit};
use super::coverage::{ochiai, profile_traces, record_traces, ChainScore, SuiteTraces};
use super::LocalizeError;

/// Tolerance for the "score of 1.0" exit test.
pub const SCORE_ONE_TOLERANCE: f64 = 1e-12;

/// Fixed interpretation notes attached to every localization report.
pub const INTERPRETATION_NOTES: [&str; 2] = [
    "chains are intraprocedural: dependence edges never cross function boundaries",
    "discard rule: a chain is dropped when none of its statements is executed by any passing run (statement-level sharing)",
];

#[derive(Debug, Clone)]
pub struct LocalizeConfig {
    pub exec: ExecConfig,
    /// Deepening stops after this chain length.
    pub max_chain_length: usize,
    pub max_static_chains: usize,
    /// Wall-clock budget per chain length.
    pub profile_budget: Duration,
    /// Fallback report size when no perfect-score chain appears.
    pub top_k: usize,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        LocalizeConfig {
            exec: ExecConfig::default(),
            max_chain_length: 4,
            max_static_chains: DEFAULT_MAX_STATIC_CHAINS,
            profile_budget: Duration::from_secs(60),
            top_k: 10,
        }
    }
}

/// Why the deepening loop stopped.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalizeExit {
    /// One or more chains scored 1.0; they are the result.
    PerfectScore,
    /// Length limit exhausted; the result is the final length's top chains.
    MaxLengthExhausted,
    /// Enumeration or profiling became infeasible; the result comes from the
    /// last completed length.
    Infeasible { at_length: usize, reason: String },
}

#[derive(Debug)]
pub struct LocalizeOutcome {
    /// Suspicious chains: all perfect-score chains, or the top-k fallback.
    pub scores: Vec<ChainScore>,
    /// Last chain length that completed profiling.
    pub length_reached: usize,
    pub exit: LocalizeExit,
    /// Recorded traces, reused by the causal fits downstream.
    pub traces: SuiteTraces,
    pub cdg: Cdg,
}

/// Iterative deepening: profile chains of length 1, 2, …; score them; discard
/// chains sharing no statement with any passing run; exit on a perfect score.
/// When the next length is infeasible or the limit is reached, fall back to
/// the top-k chains of the last completed length.
pub fn localize(
    program: &Program,
    suite: &TestSuite,
    config: &LocalizeConfig,
) -> Result<LocalizeOutcome, LocalizeError> {
    if suite.failing_indices().is_empty() {
        return Err(LocalizeError::NoFailingTests);
    }
    let cdg = build_cdg(program)?;
    if cdg.is_empty() {
        return Err(LocalizeError::NothingToLocalize);
    }

    let started = Instant::now();
    let traces = record_traces(program, suite, &config.exec);
    let has_passing = traces.verdicts.contains(&Verdict::Pass);

    // Most recent completed length whose (post-discard) score list was
    // non-empty; the fallback result when no perfect score appears.
    let mut last_scored: Option<(usize, Vec<ChainScore>)> = None;
    let mut exit = LocalizeExit::MaxLengthExhausted;
    let mut saw_infeasibility_first = true;
    for length in 1..=config.max_chain_length {
        // Trace collection counts against the first length's budget.
        let length_started = if length == 1 { started } else { Instant::now() };
        let chains = match enumerate_chains(&cdg, length, config.max_static_chains) {
            Ok(chains) => chains,
            Err(err) => {
                exit = LocalizeExit::Infeasible { at_length: length, reason: err.to_string() };
                break;
            }
        };
        if chains.is_empty() {
            // No walks of this length exist; there is no deeper complexity.
            break;
        }
        let matrix =
            match profile_traces(chains, &traces, length, config.profile_budget, length_started) {
                Ok(m) => m,
                Err(err) => {
                    exit =
                        LocalizeExit::Infeasible { at_length: length, reason: err.to_string() };
                    break;
                }
            };
        saw_infeasibility_first = false;

        // Executing chains only; never-covered enumerated chains are omitted.
        let executing: std::collections::BTreeSet<&Chain> = (0..matrix.chains.len())
            .filter(|&i| matrix.covered[i].iter().any(|c| *c))
            .map(|i| &matrix.chains[i])
            .collect();
        let mut scores = ochiai(&matrix)?;
        scores.retain(|s| executing.contains(&s.chain));
        // Discard chains none of whose statements any passing run executes;
        // with no passing runs at all the rule would discard everything and
        // is skipped.
        if has_passing {
            scores.retain(|s| shares_statement_with_passing(&s.chain, &traces));
        }

        let perfect: Vec<ChainScore> =
            scores.iter().filter(|s| s.m >= 1.0 - SCORE_ONE_TOLERANCE).cloned().collect();
        if !perfect.is_empty() {
            return Ok(LocalizeOutcome {
                scores: perfect,
                length_reached: length,
                exit: LocalizeExit::PerfectScore,
                traces,
                cdg,
            });
        }
        if !scores.is_empty() {
            last_scored = Some((length, scores));
        }
    }

    match last_scored {
        None => {
            if saw_infeasibility_first {
                let reason = match exit {
                    LocalizeExit::Infeasible { reason, .. } => reason,
                    _ => "no completed length".to_string(),
                };
                Err(LocalizeError::InfeasibleAtFirstLength(reason))
            } else {
                Err(LocalizeError::NoCandidateChains)
            }
        }
        Some((length, mut scores)) => {
            scores.truncate(config.top_k);
            Ok(LocalizeOutcome { scores, length_reached: length, exit, traces, cdg })
        }
    }
}

fn shares_statement_with_passing(chain: &Chain, traces: &SuiteTraces) -> bool {
    chain.nodes().iter().any(|s| {
        traces
            .verdicts
            .iter()
            .enumerate()
            .any(|(t, v)| *v == Verdict::Pass && traces.coverage[t][s.index()])
    })
}

/// Fit causal models for every statement appearing in the given chains.
pub fn fit_chain_statements(
    scores: &[ChainScore],
    cdg: &Cdg,
    traces: &SuiteTraces,
) -> BTreeMap<StatementId, CausalModelFit> {
    let mut fits = BTreeMap::new();
    for score in scores {
        for &stmt in score.chain.nodes() {
            fits.entry(stmt)
                .or_insert_with(|| causal_effect(stmt, cdg, &traces.coverage, &traces.verdicts));
        }
    }
    fits
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    /// Top chains by maximum causal effect (at most three).
    pub top_chains: Vec<ChainScore>,
    /// Suspicious predicates from those chains with their own causal effect,
    /// strongest first.
    pub pred_list: Vec<(PredicateId, f64)>,
}

/// Rank chains by their maximum per-statement causal effect (ties: higher
/// Ochiai score, then lexicographic), keep the top three, and extract their
/// predicate statements ordered by each predicate's own effect.
pub fn refine(
    program: &Program,
    scores: &[ChainScore],
    fits: &BTreeMap<StatementId, CausalModelFit>,
) -> RefineOutcome {
    let max_tau = |chain: &Chain| -> f64 {
        chain
            .nodes()
            .iter()
            .map(|s| fits.get(s).map_or(f64::NEG_INFINITY, |f| f.tau))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut ranked: Vec<ChainScore> = scores.to_vec();
    ranked.sort_by(|a, b| {
        max_tau(&b.chain)
            .partial_cmp(&max_tau(&a.chain))
            .expect("causal effects are finite")
            .then_with(|| b.m.partial_cmp(&a.m).expect("scores are finite"))
            .then_with(|| a.chain.cmp(&b.chain))
    });
    ranked.truncate(3);

    let mut pred_taus: BTreeMap<PredicateId, f64> = BTreeMap::new();
    for score in &ranked {
        for &stmt in score.chain.nodes() {
            if let Some(pid) = program.predicate_of(stmt) {
                let tau = fits.get(&stmt).map_or(f64::NEG_INFINITY, |f| f.tau);
                pred_taus.insert(pid, tau);
            }
        }
    }
    let mut pred_list: Vec<(PredicateId, f64)> = pred_taus.into_iter().collect();
    pred_list.sort_by(|a, b| {
        b.1.partial_cmp(&a.1).expect("causal effects are finite").then_with(|| a.0.cmp(&b.0))
    });

    RefineOutcome { top_chains: ranked, pred_list }
}
