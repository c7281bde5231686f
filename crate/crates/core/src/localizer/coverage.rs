//! Dynamic chain coverage and Ochiai scoring.

use serde::Serialize;
use std::time::{Duration, Instant};

use crate::graphs::{build_cdg, enumerate_chains, Chain};
use crate::minilang::{Program, TestSuite, Verdict};
use crate::runtime::{run_with_hooks, CdEvent, ExecConfig, Hooks};

use super::LocalizeError;

/// Per-test event streams, statement coverage, and verdicts for one suite.
#[derive(Debug, Clone)]
pub struct SuiteTraces {
    pub events: Vec<Vec<CdEvent>>,
    /// `coverage[test][statement]`
    pub coverage: Vec<Vec<bool>>,
    pub verdicts: Vec<Verdict>,
}

impl SuiteTraces {
    pub fn test_count(&self) -> usize {
        self.verdicts.len()
    }
}

/// Execute the whole suite once with event and coverage recording.
pub fn record_traces(program: &Program, suite: &TestSuite, config: &ExecConfig) -> SuiteTraces {
    let mut exec = config.clone();
    exec.record_events = true;
    exec.record_coverage = true;
    let mut events = Vec::with_capacity(suite.cases.len());
    let mut coverage = Vec::with_capacity(suite.cases.len());
    for test in &suite.cases {
        let (result, _) = run_with_hooks(program, test, Hooks::default(), &exec);
        events.push(result.events.expect("events were requested"));
        coverage.push(result.coverage.expect("coverage was requested"));
    }
    SuiteTraces { events, coverage, verdicts: suite.verdicts.clone() }
}

/// Is the chain executed by this event stream, and how many disjoint times?
///
/// A chain (s_1, …, s_k) is executed when its edges occur as a subsequence of
/// the stream at strictly increasing timestamps. The greedy earliest-match
/// scan decides existence exactly; the count is the number of greedy disjoint
/// matches and is informational (scoring binarizes it).
pub fn chain_covered(chain: &Chain, events: &[CdEvent]) -> (bool, u32) {
    let edges: Vec<_> = chain.edges().collect();
    debug_assert!(!edges.is_empty());
    let mut count = 0u32;
    let mut next_edge = 0usize;
    for event in events {
        let (parent, child) = edges[next_edge];
        if event.parent == parent && event.child == child {
            next_edge += 1;
            if next_edge == edges.len() {
                count += 1;
                next_edge = 0;
            }
        }
    }
    (count >= 1, count)
}

/// Chain-by-test coverage matrix.
#[derive(Debug, Clone)]
pub struct ChainCoverageMatrix {
    pub chains: Vec<Chain>,
    /// `covered[chain][test]`
    pub covered: Vec<Vec<bool>>,
    /// Greedy disjoint match counts, same shape.
    pub counts: Vec<Vec<u32>>,
    pub verdicts: Vec<Verdict>,
}

impl ChainCoverageMatrix {
    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }
}

/// Match every chain against every recorded trace, within a wall-clock budget.
/// `started` marks the beginning of this profiling pass (trace collection
/// included when the caller recorded them for this length).
pub fn profile_traces(
    chains: Vec<Chain>,
    traces: &SuiteTraces,
    length: usize,
    budget: Duration,
    started: Instant,
) -> Result<ChainCoverageMatrix, LocalizeError> {
    let mut covered = Vec::with_capacity(chains.len());
    let mut counts = Vec::with_capacity(chains.len());
    for chain in &chains {
        if started.elapsed() > budget {
            return Err(LocalizeError::ProfilingInfeasible {
                length,
                budget_secs: budget.as_secs(),
            });
        }
        let mut row_cov = Vec::with_capacity(traces.test_count());
        let mut row_cnt = Vec::with_capacity(traces.test_count());
        for events in &traces.events {
            let (cov, cnt) = chain_covered(chain, events);
            row_cov.push(cov);
            row_cnt.push(cnt);
        }
        covered.push(row_cov);
        counts.push(row_cnt);
    }
    Ok(ChainCoverageMatrix { chains, covered, counts, verdicts: traces.verdicts.clone() })
}

/// Profile the full suite at one chain length: enumerate static chains,
/// record traces, and match. The localizer's deepening loop uses the
/// trace-reusing pieces directly.
pub fn profile_suite(
    program: &Program,
    suite: &TestSuite,
    length: usize,
    config: &super::LocalizeConfig,
) -> Result<ChainCoverageMatrix, LocalizeError> {
    let started = Instant::now();
    let cdg = build_cdg(program)?;
    let chains = enumerate_chains(&cdg, length, config.max_static_chains)?;
    let traces = record_traces(program, suite, &config.exec);
    profile_traces(chains, &traces, length, config.profile_budget, started)
}

/// A chain with its Ochiai suspiciousness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainScore {
    pub chain: Chain,
    pub m: f64,
}

/// Ochiai scores for every chain of the matrix, sorted descending by score
/// (ties: lexicographic node order). M = a_ef / sqrt(F · (a_ef + a_ep)),
/// scored 0 when no failing test covers the chain.
pub fn ochiai(matrix: &ChainCoverageMatrix) -> Result<Vec<ChainScore>, LocalizeError> {
    let failing_total =
        matrix.verdicts.iter().filter(|v| **v == Verdict::Fail).count() as f64;
    if failing_total == 0.0 {
        return Err(LocalizeError::NoFailingTests);
    }
    let mut scores: Vec<ChainScore> = matrix
        .chains
        .iter()
        .enumerate()
        .map(|(i, chain)| {
            let mut a_ef = 0f64;
            let mut a_ep = 0f64;
            for (t, covered) in matrix.covered[i].iter().enumerate() {
                if *covered {
                    match matrix.verdicts[t] {
                        Verdict::Fail => a_ef += 1.0,
                        Verdict::Pass => a_ep += 1.0,
                    }
                }
            }
            let m = if a_ef == 0.0 {
                0.0
            } else {
                a_ef / (failing_total * (a_ef + a_ep)).sqrt()
            };
            ChainScore { chain: chain.clone(), m }
        })
        .collect();
    scores.sort_by(|a, b| {
        b.m.partial_cmp(&a.m).expect("scores are finite").then_with(|| a.chain.cmp(&b.chain))
    });
    Ok(scores)
}
