//! End-to-end pipeline: localize, generate, filter, score, rank, validate.
//!
//! Generation and similarity vectors are computed once per bug; each strategy
//! only re-combines and re-ranks them. Verdicts are shared across strategies
//! through a per-bug cache keyed by variant text.

mod bundle;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;

use crate::ast::{collect_ingredients, NodeId};
use crate::error::{write_file, Error, Result};
use crate::fault::rank_faulty_nodes;
use crate::generation::{anti_pattern_filter, apply_patch, enumerate_all, unified_diff, CandidatePatch, FilterDecision, OperatorWhitelist};
use crate::prioritization::{compute_vectors, rank, score_with_vectors, CellOutcome, ExperimentReport, RankedPatchList};
use crate::similarity::{CombinationStrategy, SimilarityVector, DEFAULT_NGRAM};
use crate::validation::{validate_in_rank_order, Classification, StopMode, TestSuite, ValidationLog, ValidationOptions, VerdictCache};

pub use bundle::{assemble, ingest_bundle, list_bundles, BugBundle, BundleFiles, MANIFEST};

#[derive(Debug, Clone)]
pub struct RepairSettings {
    pub whitelist: OperatorWhitelist,
    pub ngram: usize,
    pub validation: ValidationOptions,
    /// Overrides every test's timeout when set.
    pub timeout: Option<Duration>,
}

impl Default for RepairSettings {
    fn default() -> Self {
        Self {
            whitelist: OperatorWhitelist::reference(),
            ngram: DEFAULT_NGRAM,
            validation: ValidationOptions::default(),
            timeout: None,
        }
    }
}

/// Strategy-independent state of one bug.
pub struct PreparedBug {
    pub bundle: BugBundle,
    pub suite: TestSuite,
    /// Faulty nodes, most suspicious first.
    pub faulty: Vec<(NodeId, f64)>,
    pub suspiciousness: HashMap<NodeId, f64>,
    /// Surviving candidates in generation order.
    pub candidates: Vec<CandidatePatch>,
    pub vectors: Vec<SimilarityVector>,
    pub generated: usize,
    pub rejected_antipattern: usize,
    pub rejected_unparsable: usize,
    pub cache: VerdictCache,
}

/// Localizes, enumerates candidates, drops anti-patterns and candidates whose
/// variant does not reparse, and computes similarity vectors.
pub fn prepare(bundle: BugBundle, settings: &RepairSettings) -> Result<PreparedBug> {
    let tree = &bundle.tree;
    let grammar = bundle.grammar.as_ref();
    let desc = grammar.descriptor();
    let faulty = rank_faulty_nodes(tree, &bundle.coverage)?;
    let faulty_ids: Vec<NodeId> = faulty.iter().map(|&(n, _)| n).collect();
    let ingredients = collect_ingredients(tree);
    let all = enumerate_all(tree, &faulty_ids, &ingredients, &settings.whitelist, desc, &bundle.source_name);
    let generated = all.len();

    let kept: Vec<CandidatePatch> = all
        .into_iter()
        .filter(|c| anti_pattern_filter(c, tree, desc) == FilterDecision::Keep)
        .collect();
    let rejected_antipattern = generated - kept.len();
    let parses: Vec<bool> = kept.par_iter().map(|c| apply_patch(tree, c, grammar).is_ok()).collect();
    let candidates: Vec<CandidatePatch> = kept.into_iter().zip(parses).filter_map(|(c, ok)| ok.then_some(c)).collect();
    let rejected_unparsable = generated - rejected_antipattern - candidates.len();
    log::info!(
        "{}: {} faulty nodes, {} ingredients, {} candidates ({} anti-pattern, {} unparsable dropped)",
        bundle.id,
        faulty.len(),
        ingredients.len(),
        candidates.len(),
        rejected_antipattern,
        rejected_unparsable
    );

    let vectors = compute_vectors(&candidates, tree, desc, settings.ngram);
    let suite = match settings.timeout {
        Some(t) => bundle.suite.clone().with_timeout(t),
        None => bundle.suite.clone(),
    };
    Ok(PreparedBug {
        suspiciousness: faulty.iter().copied().collect(),
        bundle,
        suite,
        faulty,
        candidates,
        vectors,
        generated,
        rejected_antipattern,
        rejected_unparsable,
        cache: VerdictCache::new(),
    })
}

pub struct StrategyRun {
    pub ranked: RankedPatchList,
    pub log: ValidationLog,
}

impl PreparedBug {
    pub fn rank(&self, strategy: CombinationStrategy) -> RankedPatchList {
        let scored = score_with_vectors(&self.candidates, &self.vectors, strategy, &self.bundle.tree, &self.suspiciousness);
        rank(scored, strategy)
    }

    pub fn run(&self, strategy: CombinationStrategy, options: &ValidationOptions) -> Result<StrategyRun> {
        let ranked = self.rank(strategy);
        let log = validate_in_rank_order(
            &ranked,
            &self.bundle.tree,
            &self.suite,
            self.bundle.grammar.as_ref(),
            self.bundle.oracle.as_ref(),
            options,
            &self.cache,
        )?;
        Ok(StrategyRun { ranked, log })
    }

    pub fn outcome(&self, run: &StrategyRun) -> CellOutcome {
        CellOutcome {
            bug: self.bundle.id.clone(),
            strategy: run.ranked.strategy,
            total_patches: run.ranked.total,
            validated: run.log.results.len(),
            correct_ranks: run.log.ranks_of(Classification::Correct),
            plausible_incorrect_ranks: run.log.ranks_of(Classification::Plausible),
            correctness_capped: self.bundle.correctness_capped(),
        }
    }

    /// Candidate records, one JSON object per line.
    pub fn candidates_jsonl(&self) -> String {
        self.candidates
            .iter()
            .map(|c| serde_json::to_string(c).expect("candidate serializes") + "\n")
            .collect()
    }

    pub fn variant_source(&self, candidate: &CandidatePatch) -> Result<String> {
        Ok(apply_patch(&self.bundle.tree, candidate, self.bundle.grammar.as_ref())?.source)
    }
}

/// Inputs of a single repair run.
#[derive(Debug, Clone)]
pub struct RepairConfig {
    pub files: BundleFiles,
    pub strategy: CombinationStrategy,
    pub settings: RepairSettings,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RepairStatus {
    Repaired { rank: usize, candidate: usize, correct: bool },
    NoPlausible,
}

#[derive(Debug, Clone)]
pub struct RepairOutcome {
    pub status: RepairStatus,
    pub total_patches: usize,
    pub validated: usize,
    pub diff: Option<String>,
}

/// Runs the whole pipeline for one program and writes `ranked.jsonl`,
/// `ranked.txt`, `validation.jsonl` and, when a plausible patch exists,
/// `patch.diff` into the output directory. The winning patch is the first
/// correct one, or the first plausible one when none is correct.
pub fn cmd_repair(config: &RepairConfig) -> Result<RepairOutcome> {
    let bundle = assemble(config.files.clone(), config.settings.validation.max_steps)?;
    let prepared = prepare(bundle, &config.settings)?;
    let run = prepared.run(config.strategy, &config.settings.validation)?;
    let out = &config.out_dir;
    write_file(&out.join("ranked.jsonl"), run.ranked.to_jsonl())?;
    write_file(&out.join("ranked.txt"), run.ranked.to_table(&prepared.bundle.tree))?;
    write_file(&out.join("validation.jsonl"), run.log.to_jsonl())?;

    let winner = run.log.first_correct().or_else(|| run.log.first_plausible());
    let (status, diff) = match winner {
        Some(w) => {
            let patch = &run.ranked.patches[w.rank - 1];
            let variant = prepared.variant_source(&patch.candidate)?;
            let diff = unified_diff(&prepared.bundle.source, &variant, &prepared.bundle.source_name);
            write_file(&out.join("patch.diff"), &diff)?;
            write_file(&out.join("patched").join(&prepared.bundle.source_name), &variant)?;
            let status = RepairStatus::Repaired {
                rank: w.rank,
                candidate: w.candidate,
                correct: w.verdict.classification == Classification::Correct,
            };
            (status, Some(diff))
        }
        None => (RepairStatus::NoPlausible, None),
    };
    Ok(RepairOutcome {
        status,
        total_patches: run.ranked.total,
        validated: run.log.results.len(),
        diff,
    })
}

/// Everything one bug contributed to an experiment.
pub struct BugResult {
    pub prepared: PreparedBug,
    pub runs: Vec<StrategyRun>,
}

pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub bugs: Vec<BugResult>,
    /// Bundles that could not be used, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

fn run_bug(dir: &Path, strategies: &[CombinationStrategy], settings: &RepairSettings) -> Result<BugResult> {
    let bundle = ingest_bundle(dir, settings.validation.max_steps)?;
    let prepared = prepare(bundle, settings)?;
    let runs = strategies
        .iter()
        .map(|&s| prepared.run(s, &settings.validation))
        .collect::<Result<Vec<_>>>()?;
    Ok(BugResult { prepared, runs })
}

/// Runs every bundle under `corpus` with every strategy. Bundles that fail to
/// ingest or localize are skipped with a logged reason.
pub fn run_experiment(corpus: &Path, strategies: &[CombinationStrategy], settings: &RepairSettings) -> Result<ExperimentOutput> {
    if strategies.is_empty() {
        return Err(Error::Config("no strategy selected".into()));
    }
    let dirs = list_bundles(corpus)?;
    if dirs.is_empty() {
        return Err(Error::Config(format!("no bundles under {}", corpus.display())));
    }
    let results: Vec<(PathBuf, Result<BugResult>)> =
        dirs.into_par_iter().map(|d| {
            let r = run_bug(&d, strategies, settings);
            (d, r)
        }).collect();

    let mut bugs = Vec::new();
    let mut skipped = Vec::new();
    for (dir, r) in results {
        match r {
            Ok(b) => bugs.push(b),
            Err(e) => {
                log::warn!("skipping {}: {e}", dir.display());
                skipped.push((dir, e.to_string()));
            }
        }
    }
    bugs.sort_by(|a, b| a.prepared.bundle.id.cmp(&b.prepared.bundle.id));
    let cells = bugs
        .iter()
        .flat_map(|b| b.runs.iter().map(|r| b.prepared.outcome(r)))
        .collect();
    Ok(ExperimentOutput {
        report: ExperimentReport::from_cells(cells),
        bugs,
        skipped,
    })
}

impl ExperimentOutput {
    /// Writes the report files, per-bug candidate lists and per-strategy
    /// ranked lists. Nothing written depends on timing.
    pub fn write(&self, out: &Path) -> Result<()> {
        write_file(&out.join("report.jsonl"), self.report.to_jsonl())?;
        write_file(&out.join("report.txt"), self.report.to_text())?;
        write_file(&out.join("first_correct_rank.csv"), self.report.first_correct_csv())?;
        write_file(&out.join("rank_distribution.csv"), self.report.rank_distribution_csv())?;
        for b in &self.bugs {
            let id = &b.prepared.bundle.id;
            write_file(&out.join("candidates").join(format!("{id}.jsonl")), b.prepared.candidates_jsonl())?;
            for r in &b.runs {
                let name = format!("{}.jsonl", r.ranked.strategy.id());
                write_file(&out.join("ranked").join(id).join(name), r.ranked.to_jsonl())?;
            }
        }
        let skipped: String = self
            .skipped
            .iter()
            .map(|(d, reason)| format!("{}\t{reason}\n", d.file_name().unwrap_or(d.as_os_str()).to_string_lossy()))
            .collect();
        if !skipped.is_empty() {
            write_file(&out.join("skipped.txt"), skipped)?;
        }
        Ok(())
    }
}

/// Validation options used for experiment reports: exhaustive, no budget.
pub fn report_validation_options() -> ValidationOptions {
    ValidationOptions {
        stop: StopMode::Exhaustive,
        budget: None,
        ..ValidationOptions::default()
    }
}
