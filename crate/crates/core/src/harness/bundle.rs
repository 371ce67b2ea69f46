use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::ast::SourceTree;
use crate::error::{read_file, Error, Result};
use crate::fault::CoverageMatrix;
use crate::grammar::{grammar_for, Grammar};
use crate::validation::{instrument, Oracle, TestSuite};

pub const MANIFEST: &str = "bug.toml";

/// `bug.toml` of a corpus bundle. Paths are relative to the bundle directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    id: String,
    #[serde(default = "default_grammar")]
    grammar: String,
    source: String,
    fixed: Option<String>,
    tests: Option<String>,
    coverage: Option<String>,
    description: Option<String>,
}

fn default_grammar() -> String {
    crate::grammar::mini::GRAMMAR_ID.to_owned()
}

/// A validated bug: buggy program, test suite, coverage and (optionally) the
/// developer fix.
pub struct BugBundle {
    pub id: String,
    pub dir: PathBuf,
    pub description: Option<String>,
    pub grammar: Arc<dyn Grammar>,
    pub source_name: String,
    pub source: String,
    pub tree: SourceTree,
    pub suite: TestSuite,
    pub fixed: Option<String>,
    pub oracle: Option<Oracle>,
    pub coverage: CoverageMatrix,
    /// True when coverage came from the bundled instrumenter rather than a file.
    pub coverage_generated: bool,
}

impl BugBundle {
    /// Without a developer fix no variant can be classified correct.
    pub fn correctness_capped(&self) -> bool {
        self.oracle.is_none()
    }
}

impl std::fmt::Debug for BugBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BugBundle")
            .field("id", &self.id)
            .field("dir", &self.dir)
            .field("grammar", &self.grammar.id())
            .field("capped", &self.correctness_capped())
            .finish_non_exhaustive()
    }
}

/// Files making up one bug, outside of any manifest.
#[derive(Debug, Clone)]
pub struct BundleFiles {
    pub id: String,
    pub grammar: String,
    pub source: PathBuf,
    pub tests: PathBuf,
    pub fixed: Option<PathBuf>,
    pub coverage: Option<PathBuf>,
    pub description: Option<String>,
}

/// Reads and checks a bundle directory. Coverage is regenerated with the
/// instrumenter when the manifest names no coverage file.
pub fn ingest_bundle(dir: &Path, max_steps: u64) -> Result<BugBundle> {
    let manifest_path = dir.join(MANIFEST);
    let text = read_file(&manifest_path)?;
    let m: Manifest = toml::from_str(&text).map_err(|e| Error::bundle(&manifest_path, e.to_string()))?;
    let tests = m.tests.as_deref().ok_or_else(|| Error::bundle(&manifest_path, "no test suite"))?;
    let files = BundleFiles {
        id: m.id,
        grammar: m.grammar,
        source: dir.join(&m.source),
        tests: dir.join(tests),
        fixed: m.fixed.map(|f| dir.join(f)),
        coverage: m.coverage.map(|c| dir.join(c)),
        description: m.description,
    };
    assemble(files, max_steps)
}

pub fn assemble(files: BundleFiles, max_steps: u64) -> Result<BugBundle> {
    let grammar = grammar_for(&files.grammar)?;
    let source = read_file(&files.source)?;
    let tree = grammar
        .parse(&source)
        .map_err(|e| Error::bundle(&files.source, format!("does not parse: {e}")))?;
    let suite = TestSuite::load(&files.tests)?;

    let fixed = files.fixed.as_deref().map(read_file).transpose()?;
    let oracle = match (&fixed, &files.fixed) {
        (Some(text), Some(path)) => Some(
            Oracle::new(text, grammar.as_ref()).map_err(|e| Error::bundle(path, format!("developer fix: {e}")))?,
        ),
        _ => {
            log::warn!("{}: no developer fix, correctness capped at plausible", files.id);
            None
        }
    };

    let (coverage, coverage_generated) = match &files.coverage {
        Some(c) => (CoverageMatrix::parse(&read_file(c)?)?, false),
        None => (instrument(&tree, &suite, grammar.as_ref(), max_steps)?, true),
    };

    let source_name = files
        .source
        .file_name()
        .map_or_else(|| files.source.display().to_string(), |n| n.to_string_lossy().into_owned());
    Ok(BugBundle {
        id: files.id,
        dir: files.source.parent().map(Path::to_path_buf).unwrap_or_default(),
        description: files.description,
        grammar,
        source_name,
        source,
        tree,
        suite,
        fixed,
        oracle,
        coverage,
        coverage_generated,
    })
}

/// Bundle directories directly under `corpus`, sorted by name.
pub fn list_bundles(corpus: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(corpus).map_err(|e| Error::io(corpus, e))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(corpus, e))?.path();
        if path.join(MANIFEST).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}
