use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use acdc_cli::bench::{run_benchmark, summary_to_json, write_csv_tables};
use acdc_cli::corpus::{load_corpus, load_suite};
use acdc_cli::pipeline::{run_pipeline, PipelineConfig};
use acdc_cli::report::BenchSummary;
use acdc_core::graphs::{build_cdg, build_cfg, postdominators};
use acdc_core::localizer::record_traces;
use acdc_core::minilang::{parse, Program};
use acdc_core::patcher::{emit_patched_source, load_patch};
use acdc_core::runtime::run_baseline;
use acdc_core::search::{Completeness, Solution};

/// Fault localization, predicate-switching repair search, and
/// classifier-backed patching for `.acdc` programs.
#[derive(Parser)]
#[command(name = "acdc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every randomized step (splits, solver ordering).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Interpreter step budget per execution.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    step_budget: u64,

    /// Deepening limit for control dependence chains.
    #[arg(long, global = true, default_value_t = 4)]
    max_chain_length: usize,

    /// Wall-clock profiling budget per chain length, in seconds.
    #[arg(long, global = true, default_value_t = 60)]
    profile_budget_secs: u64,

    /// Comma-separated training fractions for evaluation.
    #[arg(long, global = true, default_value = "0.05,0.1,0.2,0.4,0.8,1.0")]
    train_fractions: String,

    /// Classifier kernel: rbf or linear.
    #[arg(long, global = true, default_value = "rbf")]
    kernel: String,

    /// Soft-margin parameter C.
    #[arg(long, global = true, default_value_t = 1.0)]
    svm_c: f64,

    /// Kernel width; defaults to 1/(dims · variance).
    #[arg(long, global = true)]
    svm_gamma: Option<f64>,

    /// Parallel corpus entries for bench.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Write baseline execution events as newline-delimited JSON.
    #[arg(long, global = true)]
    dump_trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Localize suspicious control dependence chains and predicates.
    Localize {
        program: PathBuf,
        suite: PathBuf,
        /// Report file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write CFG/CDG DOT dumps into this directory.
        #[arg(long)]
        dump_graphs: Option<PathBuf>,
    },
    /// Search for (predicate, pattern) repairs.
    Search {
        program: PathBuf,
        suite: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train classifiers for the best solution and write a patch file.
    Train {
        program: PathBuf,
        suite: PathBuf,
        /// Where to write the trained patch.
        #[arg(long)]
        patch_out: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect a patch against a program; optionally render annotated source.
    Patch {
        program: PathBuf,
        /// Patch file to load.
        #[arg(long)]
        patch: PathBuf,
        /// Write the developer-facing annotated source here.
        #[arg(long)]
        emit_source: Option<PathBuf>,
    },
    /// Run the full pipeline: localize, search, train, patch, evaluate.
    /// Exits 0 on a full patch, 2 on a partial one, 3 when none is found.
    Run {
        program: PathBuf,
        suite: PathBuf,
        #[arg(long)]
        patch_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate classifier accuracy across training fractions.
    Eval {
        program: PathBuf,
        suite: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every corpus entry and aggregate pattern, scenario, and accuracy
    /// tables.
    Bench {
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render the three CSV tables into this directory.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Re-render the CSV tables from an existing bench summary.
    Report {
        summary: PathBuf,
        #[arg(long)]
        csv_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let config = build_config(&cli)?;
    match &cli.command {
        Command::Localize { program, suite, out, dump_graphs } => {
            let (prog, cases) = load_inputs(program, suite)?;
            if let Some(dir) = dump_graphs {
                dump_graph_files(&prog, dir)?;
            }
            if let Some(path) = &cli.dump_trace {
                dump_trace(&prog, suite, &config, path)?;
            }
            let suite_run = run_baseline(&prog, cases, &config.exec);
            let mut loc_config = config.localize.clone();
            loc_config.exec = config.exec.clone();
            let outcome = acdc_core::localizer::localize(&prog, &suite_run, &loc_config)
                .map_err(|e| anyhow::anyhow!("stage localize: {e}"))?;
            let fits = acdc_core::localizer::fit_chain_statements(
                &outcome.scores,
                &outcome.cdg,
                &outcome.traces,
            );
            let refined = acdc_core::localizer::refine(&prog, &outcome.scores, &fits);
            let report = acdc_cli::report::LocalizeReport {
                chains: outcome.scores.iter().map(Into::into).collect(),
                top_chains: refined.top_chains.iter().map(Into::into).collect(),
                taus: fits.values().map(Into::into).collect(),
                pred_list: refined
                    .pred_list
                    .iter()
                    .map(|&(predicate, tau)| acdc_cli::report::PredicateRank { predicate, tau })
                    .collect(),
                length_reached: outcome.length_reached,
                exit: outcome.exit.clone(),
                notes: acdc_core::localizer::INTERPRETATION_NOTES
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            };
            emit_json(&report, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Search { program, suite, out } => {
            let (prog, cases) = load_inputs(program, suite)?;
            let mut cfg = config.clone();
            cfg.fractions = Vec::new(); // search stops before training
            let output = run_pipeline(&prog, cases, &cfg, &display(program), &display(suite), None)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            emit_json(&output.report.search, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Train { program, suite, patch_out, out } => {
            let (prog, cases) = load_inputs(program, suite)?;
            let mut cfg = config.clone();
            cfg.fractions = Vec::new();
            let output = run_pipeline(
                &prog,
                cases,
                &cfg,
                &display(program),
                &display(suite),
                Some(patch_out),
            )
            .map_err(|e| anyhow::anyhow!("{e}"))?;
            if output.patch.is_none() {
                bail!("no repair found; nothing to train");
            }
            emit_json(&output.report, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Patch { program, patch, emit_source } => {
            let source = std::fs::read_to_string(program)
                .with_context(|| format!("reading {}", program.display()))?;
            let prog = parse_program(&source, program)?;
            let patch = load_patch(patch)?;
            if patch.program_digest != prog.source_digest {
                bail!(
                    "patch digest {:#018x} does not match program digest {:#018x}",
                    patch.program_digest,
                    prog.source_digest
                );
            }
            if let Some(path) = emit_source {
                let solution = Solution {
                    pairs: patch.provenance.pairs.clone(),
                    fixed: Default::default(),
                    completeness: Completeness::Full,
                };
                std::fs::write(path, emit_patched_source(&prog, &solution))?;
            }
            emit_json(&patch.provenance, None)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { program, suite, patch_out, out } => {
            let (prog, cases) = load_inputs(program, suite)?;
            if let Some(path) = &cli.dump_trace {
                dump_trace(&prog, suite, &config, path)?;
            }
            let output = run_pipeline(
                &prog,
                cases,
                &config,
                &display(program),
                &display(suite),
                patch_out.as_deref(),
            )
            .map_err(|e| anyhow::anyhow!("{e}"))?;
            emit_json(&output.report, out.as_deref())?;
            Ok(ExitCode::from(output.report.exit_code as u8))
        }
        Command::Eval { program, suite, out } => {
            let (prog, cases) = load_inputs(program, suite)?;
            let output = run_pipeline(&prog, cases, &config, &display(program), &display(suite), None)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            if output.report.chosen.is_none() {
                bail!("no repair found; nothing to evaluate");
            }
            emit_json(&output.report.accuracies, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { corpus, out, csv_dir } => {
            let entries = load_corpus(corpus)?;
            let summary = run_benchmark(&entries, &config, cli.jobs)?;
            let text = summary_to_json(&summary);
            match out {
                Some(path) => std::fs::write(path, &text)?,
                None => print!("{text}"),
            }
            if let Some(dir) = csv_dir {
                write_csv_tables(&summary, dir)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { summary, csv_dir } => {
            let text = std::fs::read_to_string(summary)
                .with_context(|| format!("reading {}", summary.display()))?;
            let summary: BenchSummary =
                serde_json::from_str(&text).with_context(|| "parsing bench summary")?;
            write_csv_tables(&summary, csv_dir)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn build_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = PipelineConfig::with_seed(cli.seed);
    config.exec.step_budget = cli.step_budget;
    config.localize.max_chain_length = cli.max_chain_length;
    config.localize.profile_budget = Duration::from_secs(cli.profile_budget_secs);
    config.train.c = cli.svm_c;
    config.train.gamma = cli.svm_gamma;
    config.train.use_rbf = match cli.kernel.as_str() {
        "rbf" => true,
        "linear" => false,
        other => bail!("unknown kernel `{other}` (expected rbf or linear)"),
    };
    config.fractions = cli
        .train_fractions
        .split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid training fraction `{f}`"))
        })
        .collect::<Result<Vec<f64>>>()?;
    for &f in &config.fractions {
        if !(f > 0.0 && f <= 1.0) {
            bail!("training fraction {f} is outside (0, 1]");
        }
    }
    Ok(config)
}

fn parse_program(source: &str, path: &Path) -> Result<Program> {
    parse(source).map_err(|diags| {
        let rendered: Vec<String> = diags
            .0
            .iter()
            .map(|d| format!("{}:{d}", path.display()))
            .collect();
        anyhow::anyhow!("{}", rendered.join("\n"))
    })
}

fn load_inputs(
    program: &Path,
    suite: &Path,
) -> Result<(Program, Vec<acdc_core::minilang::TestCase>)> {
    let source = std::fs::read_to_string(program)
        .with_context(|| format!("reading {}", program.display()))?;
    let prog = parse_program(&source, program)?;
    let cases = load_suite(suite)?;
    Ok((prog, cases))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn dump_graph_files(program: &Program, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for function in &program.functions {
        let cfg = build_cfg(program, function);
        // Building the tree validates the reach-EXIT invariant early.
        postdominators(&cfg.graph).map_err(|e| anyhow::anyhow!("{e}"))?;
        std::fs::write(
            dir.join(format!("cfg_{}.dot", function.name)),
            cfg.to_dot(program, &function.name),
        )?;
    }
    let cdg = build_cdg(program).map_err(|e| anyhow::anyhow!("{e}"))?;
    std::fs::write(dir.join("cdg.dot"), cdg.to_dot())?;
    Ok(())
}

/// Baseline event streams as newline-delimited JSON, one object per event.
fn dump_trace(program: &Program, suite: &Path, config: &PipelineConfig, path: &Path) -> Result<()> {
    let cases = load_suite(suite)?;
    let suite_run = run_baseline(program, cases, &config.exec);
    let traces = record_traces(program, &suite_run, &config.exec);
    let mut out = String::new();
    for (test, events) in traces.events.iter().enumerate() {
        for e in events {
            out.push_str(&serde_json::to_string(&serde_json::json!({
                "test": test,
                "timestamp": e.timestamp,
                "parent": e.parent,
                "child": e.child,
            }))?);
            out.push('\n');
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
