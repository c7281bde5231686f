//! End-to-end pipeline: localize → search → collect → train → patch →
//! evaluate. Stage failures halt the pipeline and surface with the stage
//! name; an unrepairable program is not a failure but an empty result with
//! exit code 3.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use acdc_core::learner::{evaluate, train_solution, EvalReport, TrainConfig};
use acdc_core::localizer::{
    fit_chain_statements, localize, refine, LocalizeConfig, INTERPRETATION_NOTES,
};
use acdc_core::minilang::{Program, TestCase, TestSuite};
use acdc_core::patcher::{save_patch, TrainedPatch};
use acdc_core::runtime::{run_baseline, ExecConfig};
use acdc_core::search::{
    classify_scenario, multiple_predicate_search, single_predicate_search, Scenario, SearchConfig,
    Solution, SuiteOccurrences,
};

use crate::report::{
    pattern_histogram, scenario_distribution, ChainReport, LocalizeReport, PipelineReport,
    PredicateRank, SearchReport, SolutionReport, TauReport,
};

#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub message: String,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.message)
    }
}

impl std::error::Error for StageError {}

fn stage<T, E: fmt::Display>(name: &'static str, r: Result<T, E>) -> Result<T, StageError> {
    r.map_err(|e| StageError { stage: name, message: e.to_string() })
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub seed: u64,
    pub exec: ExecConfig,
    pub localize: LocalizeConfig,
    pub train: TrainConfig,
    /// Training fractions evaluated after patching.
    pub fractions: Vec<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            exec: ExecConfig::default(),
            localize: LocalizeConfig::default(),
            train: TrainConfig::default(),
            fractions: vec![0.05, 0.1, 0.2, 0.4, 0.8, 1.0],
        }
    }
}

impl PipelineConfig {
    pub fn with_seed(seed: u64) -> Self {
        let mut c = PipelineConfig { seed, ..PipelineConfig::default() };
        c.train.seed = seed;
        c
    }
}

pub struct PipelineOutput {
    pub report: PipelineReport,
    pub patch: Option<TrainedPatch>,
    pub suite: TestSuite,
}

/// Run the whole pipeline on one program and test-case list.
pub fn run_pipeline(
    program: &Program,
    cases: Vec<TestCase>,
    config: &PipelineConfig,
    program_name: &str,
    suite_name: &str,
    patch_out: Option<&Path>,
) -> Result<PipelineOutput, StageError> {
    let suite = run_baseline(program, cases, &config.exec);
    let failing = suite.failing_indices();

    // Localize.
    let mut loc_config = config.localize.clone();
    loc_config.exec = config.exec.clone();
    let outcome = stage("localize", localize(program, &suite, &loc_config))?;
    let fits = fit_chain_statements(&outcome.scores, &outcome.cdg, &outcome.traces);
    let refined = refine(program, &outcome.scores, &fits);
    let localize_report = LocalizeReport {
        chains: outcome.scores.iter().map(ChainReport::from).collect(),
        top_chains: refined.top_chains.iter().map(ChainReport::from).collect(),
        taus: fits.values().map(TauReport::from).collect(),
        pred_list: refined
            .pred_list
            .iter()
            .map(|&(predicate, tau)| PredicateRank { predicate, tau })
            .collect(),
        length_reached: outcome.length_reached,
        exit: outcome.exit.clone(),
        notes: INTERPRETATION_NOTES.iter().map(|s| s.to_string()).collect(),
    };
    if refined.pred_list.is_empty() {
        return Err(StageError {
            stage: "localize",
            message: "no suspicious predicates survived refinement".to_string(),
        });
    }

    // Search.
    let search_config = SearchConfig { exec: config.exec.clone() };
    let (solutions, records) =
        single_predicate_search(program, &refined.pred_list, &suite, &search_config);
    let tau_map: BTreeMap<_, _> = refined.pred_list.iter().copied().collect();
    let t_fail: std::collections::BTreeSet<usize> = failing.iter().copied().collect();
    let full_single = solutions.iter().find(|s| s.is_full()).cloned();
    let multi = if full_single.is_none() {
        multiple_predicate_search(&records, &t_fail, &tau_map)
    } else {
        None
    };

    let occurrences = SuiteOccurrences::collect(program, &suite, &config.exec);
    let mut solution_reports: Vec<SolutionReport> = solutions
        .iter()
        .map(|s| SolutionReport::new(s, classify_scenario(s, &occurrences)))
        .collect();
    if let Some(m) = &multi {
        solution_reports.push(SolutionReport::new(m, classify_scenario(m, &occurrences)));
    }
    let search_report = SearchReport {
        pattern_histogram: pattern_histogram(solution_reports.iter()),
        scenario_distribution: scenario_distribution(solution_reports.iter()),
        solutions: solution_reports.clone(),
    };

    // Choose the deployed solution: the best full single-pair solution, else
    // whatever the greedy multiple search assembled.
    let chosen: Option<Solution> = full_single.or(multi);
    let (chosen_report, scenario) = match &chosen {
        Some(s) => {
            let scenario = classify_scenario(s, &occurrences);
            (Some(SolutionReport::new(s, scenario)), Some(scenario))
        }
        None => (None, None),
    };

    // Train, patch, evaluate.
    let (patch, accuracies) = match &chosen {
        None => (None, Vec::new()),
        Some(solution) => {
            let scenario = scenario.expect("chosen solutions are classified");
            let all: Vec<usize> = (0..suite.cases.len()).collect();
            let patch = stage(
                "train",
                train_solution(
                    program,
                    &suite,
                    &all,
                    solution,
                    scenario,
                    1.0,
                    &config.exec,
                    &config.train,
                ),
            )?;
            if let Some(path) = patch_out {
                stage("patch", save_patch(&patch, path))?;
            }
            let mut reports: Vec<EvalReport> = Vec::new();
            for &fraction in &config.fractions {
                let report = stage(
                    "evaluate",
                    evaluate(
                        program,
                        &suite,
                        solution,
                        scenario,
                        fraction,
                        config.seed,
                        &config.exec,
                        &config.train,
                    ),
                )?;
                reports.push(report);
            }
            (Some(patch), reports)
        }
    };

    let exit_code = match &chosen {
        Some(s) if s.is_full() => 0,
        Some(_) => 2,
        None => 3,
    };

    Ok(PipelineOutput {
        report: PipelineReport {
            program: program_name.to_string(),
            suite: suite_name.to_string(),
            failing_tests: failing,
            localize: localize_report,
            search: search_report,
            chosen: chosen_report,
            accuracies,
            patch_path: patch_out.map(|p| p.display().to_string()),
            exit_code,
        },
        patch,
        suite,
    })
}

/// Scenario of the chosen solution, if any (bench row shorthand).
pub fn chosen_scenario(report: &PipelineReport) -> Option<Scenario> {
    report.chosen.as_ref().map(|c| c.scenario)
}
