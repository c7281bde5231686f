//! Corpus entries: a buggy program, its test suite, and bug metadata.
//!
//! A corpus directory holds one subdirectory per entry, each containing
//! `program.acdc`, `suite.json`, and an optional `meta.json`:
//!
//! ```json
//! { "description": "...", "buggy_predicate": 2, "expected_scenario": 3 }
//! ```

use std::path::{Path, PathBuf};

use acdc_core::minilang::TestCase;
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EntryMeta {
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buggy_predicate: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_scenario: Option<u8>,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub program_path: PathBuf,
    pub suite_path: PathBuf,
    pub meta: EntryMeta,
}

#[derive(Debug, Deserialize)]
struct SuiteFile {
    cases: Vec<CaseFile>,
}

#[derive(Debug, Deserialize)]
struct CaseFile {
    args: Vec<i64>,
    expected: String,
}

/// Load a test suite file; expected outputs are newline-normalized.
pub fn load_suite(path: &Path) -> Result<Vec<TestCase>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading suite {}", path.display()))?;
    let file: SuiteFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing suite {}", path.display()))?;
    Ok(file
        .cases
        .into_iter()
        .map(|c| TestCase::new(c.args, c.expected))
        .collect())
}

pub fn load_entry(dir: &Path) -> Result<CorpusEntry> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| dir.display().to_string());
    let program_path = dir.join("program.acdc");
    let suite_path = dir.join("suite.json");
    if !program_path.exists() {
        bail!("entry {name}: missing program.acdc");
    }
    if !suite_path.exists() {
        bail!("entry {name}: missing suite.json");
    }
    let meta_path = dir.join("meta.json");
    let meta = if meta_path.exists() {
        let text = std::fs::read_to_string(&meta_path)
            .with_context(|| format!("reading {}", meta_path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", meta_path.display()))?
    } else {
        EntryMeta::default()
    };
    Ok(CorpusEntry { name, program_path, suite_path, meta })
}

/// All entries of a corpus directory, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>> {
    if !dir.is_dir() {
        bail!("corpus directory {} does not exist", dir.display());
    }
    let mut entries = Vec::new();
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading corpus directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    for sub in subdirs {
        entries.push(load_entry(&sub)?);
    }
    if entries.is_empty() {
        bail!("corpus directory {} has no entries", dir.display());
    }
    Ok(entries)
}
