//! Serializable report shapes shared by the subcommands. Reports use sorted
//! maps and carry no wall-clock data, so identical inputs and seeds always
//! produce byte-identical output.

use acdc_core::learner::EvalReport;
use acdc_core::localizer::{CausalModelFit, ChainScore, LocalizeExit};
use acdc_core::minilang::{PredicateId, StatementId};
use acdc_core::search::{Completeness, Pattern, Scenario, Solution};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub nodes: Vec<StatementId>,
    pub m: f64,
}

impl From<&ChainScore> for ChainReport {
    fn from(cs: &ChainScore) -> Self {
        ChainReport { nodes: cs.chain.nodes().to_vec(), m: cs.m }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TauReport {
    pub statement: StatementId,
    pub tau: f64,
    pub beta_present: bool,
    pub degenerate: bool,
}

impl From<&CausalModelFit> for TauReport {
    fn from(fit: &CausalModelFit) -> Self {
        TauReport {
            statement: fit.statement,
            tau: fit.tau,
            beta_present: fit.beta.is_some(),
            degenerate: fit.degenerate,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PredicateRank {
    pub predicate: PredicateId,
    pub tau: f64,
}

/// Output of the `localize` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct LocalizeReport {
    pub chains: Vec<ChainReport>,
    pub top_chains: Vec<ChainReport>,
    pub taus: Vec<TauReport>,
    pub pred_list: Vec<PredicateRank>,
    pub length_reached: usize,
    pub exit: LocalizeExit,
    /// Fixed interpretation notes (chain scope and discard-rule reading).
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub pairs: Vec<PairReport>,
    pub fixed_tests: Vec<usize>,
    pub completeness: Completeness,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub predicate: PredicateId,
    pub pattern: Pattern,
}

impl SolutionReport {
    pub fn new(solution: &Solution, scenario: Scenario) -> Self {
        SolutionReport {
            pairs: solution
                .pairs
                .iter()
                .map(|&(predicate, pattern)| PairReport { predicate, pattern })
                .collect(),
            fixed_tests: solution.fixed.iter().copied().collect(),
            completeness: solution.completeness,
            scenario,
        }
    }
}

/// Output of the `search` subcommand: every FULL and PARTIAL solution plus
/// the figure-analog aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub solutions: Vec<SolutionReport>,
    pub pattern_histogram: BTreeMap<String, usize>,
    pub scenario_distribution: BTreeMap<u8, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub program: String,
    pub suite: String,
    pub failing_tests: Vec<usize>,
    pub localize: LocalizeReport,
    pub search: SearchReport,
    pub chosen: Option<SolutionReport>,
    pub accuracies: Vec<EvalReport>,
    pub patch_path: Option<String>,
    /// 0 = full patch, 2 = partial only, 3 = none.
    pub exit_code: i32,
}

pub fn pattern_histogram<'a>(
    solutions: impl Iterator<Item = &'a SolutionReport>,
) -> BTreeMap<String, usize> {
    let mut hist = BTreeMap::new();
    for s in solutions {
        for pair in &s.pairs {
            *hist.entry(pair.pattern.name().to_string()).or_insert(0) += 1;
        }
    }
    hist
}

pub fn scenario_distribution<'a>(
    solutions: impl Iterator<Item = &'a SolutionReport>,
) -> BTreeMap<u8, usize> {
    let mut dist = BTreeMap::new();
    for s in solutions {
        *dist.entry(s.scenario.number()).or_insert(0) += 1;
    }
    dist
}

// ---- bench ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryStatus {
    Full,
    Partial,
    None,
    Error,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub status: EntryStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub full_solutions: usize,
    pub partial_solutions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<u8>,
    pub pred_list: Vec<u32>,
    pub chosen_patterns: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buggy_predicate: Option<u32>,
    /// Whether the known buggy predicate appears in the suspicious list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buggy_predicate_localized: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_scenario: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario_matches: Option<bool>,
    /// Training fraction (rendered as text) → accuracy.
    pub accuracies: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub entries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchAggregate {
    pub full: usize,
    pub partial: usize,
    pub none: usize,
    pub errors: usize,
    pub pattern_histogram: BTreeMap<String, usize>,
    pub scenario_distribution: BTreeMap<u8, usize>,
    pub accuracy_by_fraction: BTreeMap<String, FractionStats>,
    pub localized_known_bugs: usize,
    pub known_bugs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSummary {
    pub seed: u64,
    pub entries: Vec<BenchRow>,
    pub aggregate: BenchAggregate,
}

/// Recompute the aggregate tables from the per-entry rows (aggregation is
/// pure, so a summary can always be rebuilt from its rows).
pub fn aggregate_rows(rows: &[BenchRow]) -> BenchAggregate {
    let mut agg = BenchAggregate {
        full: 0,
        partial: 0,
        none: 0,
        errors: 0,
        pattern_histogram: BTreeMap::new(),
        scenario_distribution: BTreeMap::new(),
        accuracy_by_fraction: BTreeMap::new(),
        localized_known_bugs: 0,
        known_bugs: 0,
    };
    let mut samples: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in rows {
        match row.status {
            EntryStatus::Full => agg.full += 1,
            EntryStatus::Partial => agg.partial += 1,
            EntryStatus::None => agg.none += 1,
            EntryStatus::Error => agg.errors += 1,
        }
        for pattern in &row.chosen_patterns {
            *agg.pattern_histogram.entry(pattern.clone()).or_insert(0) += 1;
        }
        if let Some(s) = row.scenario {
            *agg.scenario_distribution.entry(s).or_insert(0) += 1;
        }
        if row.buggy_predicate.is_some() {
            agg.known_bugs += 1;
            if row.buggy_predicate_localized == Some(true) {
                agg.localized_known_bugs += 1;
            }
        }
        for (fraction, accuracy) in &row.accuracies {
            samples.entry(fraction.clone()).or_default().push(*accuracy);
        }
    }
    for (fraction, values) in samples {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        agg.accuracy_by_fraction
            .insert(fraction, FractionStats { mean, min, max, entries: values.len() });
    }
    agg
}

/// Render the three figure-analog CSV tables from a summary.
pub fn render_csv_tables(summary: &BenchSummary) -> Vec<(String, String)> {
    let mut pattern_csv = String::from("pattern,count\n");
    for (pattern, count) in &summary.aggregate.pattern_histogram {
        pattern_csv.push_str(&format!("{pattern},{count}\n"));
    }
    let mut scenario_csv = String::from("scenario,count\n");
    for (scenario, count) in &summary.aggregate.scenario_distribution {
        scenario_csv.push_str(&format!("{scenario},{count}\n"));
    }
    let mut accuracy_csv = String::from("fraction,mean,min,max,entries\n");
    for (fraction, stats) in &summary.aggregate.accuracy_by_fraction {
        accuracy_csv.push_str(&format!(
            "{fraction},{:?},{:?},{:?},{}\n",
            stats.mean, stats.min, stats.max, stats.entries
        ));
    }
    vec![
        ("pattern_histogram.csv".to_string(), pattern_csv),
        ("scenario_distribution.csv".to_string(), scenario_csv),
        ("accuracy_by_fraction.csv".to_string(), accuracy_csv),
    ]
}
