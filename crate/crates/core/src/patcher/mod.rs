//! Deployable patches: assembly, persistence, and developer-facing source
//! annotation.
//!
//! A patch is a sidecar file consumed by the interpreter rather than a
//! rewritten executable: it binds trained classifiers to predicate sites of
//! one exact program version (guarded by the source digest) and records full
//! provenance. The file format is versioned JSON, documented in
//! `docs/formats.md`.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::learner::svm::ClassifierModel;
use crate::minilang::{PredicateId, Program};
use crate::search::{Pattern, Scenario, Solution};
use thiserror::Error;

/// Current patch file format version.
pub const PATCH_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchEntry {
    pub predicate: PredicateId,
    pub model: ClassifierModel,
}

/// How the patch came to be: the repair pairs, scenario, and training setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub pairs: Vec<(PredicateId, Pattern)>,
    pub scenario: Scenario,
    pub training_fraction: f64,
    pub seed: u64,
    pub tool_version: String,
}

/// A trained, deployable patch for one program version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPatch {
    pub program_digest: u64,
    pub entries: Vec<PatchEntry>,
    pub provenance: Provenance,
}

#[derive(Debug, Error)]
pub enum PatchError {
    #[error("solution has {pairs} pair(s) but {models} model(s) were supplied")]
    ModelCountMismatch { pairs: usize, models: usize },
    #[error("patch file has format version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("malformed patch file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Assemble a patch: one model per solution pair, in pair order.
pub fn build_patch(
    program: &Program,
    solution: &Solution,
    models: Vec<ClassifierModel>,
    scenario: Scenario,
    training_fraction: f64,
    seed: u64,
) -> Result<TrainedPatch, PatchError> {
    if models.len() != solution.pairs.len() {
        return Err(PatchError::ModelCountMismatch {
            pairs: solution.pairs.len(),
            models: models.len(),
        });
    }
    let entries = solution
        .pairs
        .iter()
        .zip(models)
        .map(|(&(predicate, _), model)| PatchEntry { predicate, model })
        .collect();
    Ok(TrainedPatch {
        program_digest: program.source_digest,
        entries,
        provenance: Provenance {
            pairs: solution.pairs.clone(),
            scenario,
            training_fraction,
            seed,
            tool_version: crate::TOOL_VERSION.to_string(),
        },
    })
}

/// On-disk envelope carrying the format version.
#[derive(Serialize, Deserialize)]
struct PatchFile {
    format_version: u32,
    #[serde(flatten)]
    patch: TrainedPatch,
}

pub fn save_patch(patch: &TrainedPatch, path: &Path) -> Result<(), PatchError> {
    let file = PatchFile { format_version: PATCH_FORMAT_VERSION, patch: patch.clone() };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| PatchError::Malformed(e.to_string()))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_patch(path: &Path) -> Result<TrainedPatch, PatchError> {
    let text = std::fs::read_to_string(path)?;
    // Check the version before strict decoding so version skew is reported
    // as such instead of as an arbitrary missing-field error.
    let probe: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| PatchError::Malformed(e.to_string()))?;
    let found = probe
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| PatchError::Malformed("missing format_version".to_string()))?
        as u32;
    if found != PATCH_FORMAT_VERSION {
        return Err(PatchError::VersionMismatch { found, expected: PATCH_FORMAT_VERSION });
    }
    let file: PatchFile =
        serde_json::from_str(&text).map_err(|e| PatchError::Malformed(e.to_string()))?;
    Ok(file.patch)
}

/// Render the original source with each patched predicate's condition
/// rewritten to `(<cond>) XOR shouldNegate(<id>)`, annotated with the pattern
/// that produced the training labels. Informational output for developers;
/// everything outside the rewritten conditions is byte-identical.
pub fn emit_patched_source(program: &Program, solution: &Solution) -> String {
    let mut rewrites: Vec<(usize, usize, String)> = solution
        .pairs
        .iter()
        .map(|&(pid, pattern)| {
            let info = program.predicate(pid);
            let function = program.function(info.function);
            let cond = condition_expr(function, info.statement)
                .expect("predicate statements carry conditions");
            let text = format!(
                "({}) XOR shouldNegate({}) /* pattern: {} */",
                cond.render(),
                pid.0,
                pattern
            );
            (info.cond_span.start, info.cond_span.end, text)
        })
        .collect();
    // Rewrite back-to-front so byte offsets stay valid.
    rewrites.sort_by_key(|(start, _, _)| std::cmp::Reverse(*start));
    let mut out = program.source.clone();
    for (start, end, text) in rewrites {
        out.replace_range(start..end, &text);
    }
    out
}

fn condition_expr(
    function: &crate::minilang::FunctionDecl,
    id: crate::minilang::StatementId,
) -> Option<&crate::minilang::Expr> {
    use crate::minilang::StmtKind;
    fn walk(
        body: &[crate::minilang::Stmt],
        id: crate::minilang::StatementId,
    ) -> Option<&crate::minilang::Expr> {
        for stmt in body {
            match &stmt.kind {
                StmtKind::If { cond, then_branch, else_branch } => {
                    if stmt.id == id {
                        return Some(cond);
                    }
                    if let Some(c) = walk(then_branch, id).or_else(|| walk(else_branch, id)) {
                        return Some(c);
                    }
                }
                StmtKind::While { cond, body } => {
                    if stmt.id == id {
                        return Some(cond);
                    }
                    if let Some(c) = walk(body, id) {
                        return Some(c);
                    }
                }
                _ => {}
            }
        }
        None
    }
    walk(&function.body, id)
}
