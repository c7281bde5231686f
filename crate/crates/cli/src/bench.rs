//! Batch runs over a corpus directory. Entries execute independently (up to
//! `jobs` in parallel); per-entry failures become error rows instead of
//! aborting the batch, and rows are emitted in name order so summaries are
//! reproducible byte for byte.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::Result;

use crate::corpus::{load_suite, CorpusEntry};
use crate::pipeline::{chosen_scenario, run_pipeline, PipelineConfig};
use crate::report::{aggregate_rows, BenchRow, BenchSummary, EntryStatus};

pub fn run_benchmark(
    entries: &[CorpusEntry],
    config: &PipelineConfig,
    jobs: usize,
) -> Result<BenchSummary> {
    let jobs = jobs.max(1).min(entries.len().max(1));
    let rows: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; entries.len()]);
    let next: AtomicUsize = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= entries.len() {
                    break;
                }
                let row = run_entry(&entries[i], config);
                if let Some(slot) = rows.lock().expect("row mutex").get_mut(i) {
                    *slot = Some(row);
                }
            });
        }
    });

    let rows: Vec<BenchRow> = rows
        .into_inner()
        .expect("row mutex")
        .into_iter()
        .map(|r| r.expect("every entry produced a row"))
        .collect();
    let aggregate = aggregate_rows(&rows);
    Ok(BenchSummary { seed: config.seed, entries: rows, aggregate })
}

fn error_row(entry: &CorpusEntry, message: String) -> BenchRow {
    BenchRow {
        name: entry.name.clone(),
        status: EntryStatus::Error,
        error: Some(message),
        full_solutions: 0,
        partial_solutions: 0,
        scenario: None,
        pred_list: Vec::new(),
        chosen_patterns: Vec::new(),
        buggy_predicate: entry.meta.buggy_predicate,
        buggy_predicate_localized: None,
        expected_scenario: entry.meta.expected_scenario,
        scenario_matches: None,
        accuracies: BTreeMap::new(),
    }
}

pub fn run_entry(entry: &CorpusEntry, config: &PipelineConfig) -> BenchRow {
    let source = match std::fs::read_to_string(&entry.program_path) {
        Ok(s) => s,
        Err(e) => return error_row(entry, format!("reading program: {e}")),
    };
    let program = match acdc_core::minilang::parse(&source) {
        Ok(p) => p,
        Err(d) => return error_row(entry, format!("parse: {d}")),
    };
    let cases = match load_suite(&entry.suite_path) {
        Ok(c) => c,
        Err(e) => return error_row(entry, e.to_string()),
    };

    let output = match run_pipeline(
        &program,
        cases,
        config,
        &entry.program_path.display().to_string(),
        &entry.suite_path.display().to_string(),
        None,
    ) {
        Ok(o) => o,
        Err(e) => return error_row(entry, e.to_string()),
    };
    let report = &output.report;

    let status = match report.exit_code {
        0 => EntryStatus::Full,
        2 => EntryStatus::Partial,
        _ => EntryStatus::None,
    };
    let pred_list: Vec<u32> = report.localize.pred_list.iter().map(|p| p.predicate.0).collect();
    let scenario = chosen_scenario(report).map(|s| s.number());
    let chosen_patterns: Vec<String> = report
        .chosen
        .as_ref()
        .map(|c| c.pairs.iter().map(|p| p.pattern.name().to_string()).collect())
        .unwrap_or_default();
    let accuracies: BTreeMap<String, f64> = report
        .accuracies
        .iter()
        .map(|r| (format!("{:?}", r.fraction), r.accuracy))
        .collect();

    BenchRow {
        name: entry.name.clone(),
        status,
        error: None,
        full_solutions: report
            .search
            .solutions
            .iter()
            .filter(|s| s.completeness == acdc_core::search::Completeness::Full)
            .count(),
        partial_solutions: report
            .search
            .solutions
            .iter()
            .filter(|s| s.completeness == acdc_core::search::Completeness::Partial)
            .count(),
        scenario,
        buggy_predicate_localized: entry
            .meta
            .buggy_predicate
            .map(|b| pred_list.contains(&b)),
        pred_list,
        chosen_patterns,
        buggy_predicate: entry.meta.buggy_predicate,
        expected_scenario: entry.meta.expected_scenario,
        scenario_matches: match (entry.meta.expected_scenario, scenario) {
            (Some(expected), Some(actual)) => Some(expected == actual),
            (Some(_), None) => Some(false),
            (None, _) => None,
        },
        accuracies,
    }
}

/// Serialize a summary deterministically (pretty JSON with trailing newline).
pub fn summary_to_json(summary: &BenchSummary) -> String {
    let mut text = serde_json::to_string_pretty(summary).expect("summaries serialize");
    text.push('\n');
    text
}

pub fn write_csv_tables(summary: &BenchSummary, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, content) in crate::report::render_csv_tables(summary) {
        std::fs::write(dir.join(name), content)?;
    }
    Ok(())
}
