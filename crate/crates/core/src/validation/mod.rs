//! Test-suite execution against program variants.
//!
//! A variant is plausible when every test passes and correct when it is also
//! token-identical to the bundled developer fix. Verdicts depend only on the
//! variant text, so they are cached by text and shared across ranked lists.

mod suite;

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ast::{executable_lines, SourceTree};
use crate::error::{Error, Result};
use crate::fault::{CoverageMatrix, TestCoverage, Verdict};
use crate::generation::apply_patch;
use crate::grammar::{ExecLimits, ExecStatus, Executor, Grammar};
use crate::prioritization::RankedPatchList;

pub use suite::{normalize_output, outputs_match, Polarity, TestCase, TestSuite, DEFAULT_TIMEOUT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Fails,
    Plausible,
    Correct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome", content = "detail")]
pub enum TestOutcome {
    Passed,
    WrongOutput,
    RuntimeError(String),
    TimedOut,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub test_id: String,
    pub polarity: Polarity,
    #[serde(flatten)]
    pub outcome: TestOutcome,
}

impl TestVerdict {
    pub fn passed(&self) -> bool {
        self.outcome == TestOutcome::Passed
    }
}

/// Verdicts of one variant text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantVerdict {
    /// Tests actually run; a run stops at the first failure.
    pub verdicts: Vec<TestVerdict>,
    pub classification: Classification,
    /// Set when the variant could not be built or parsed.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub rank: usize,
    pub candidate: usize,
    #[serde(flatten)]
    pub verdict: VariantVerdict,
    /// Earlier rank in the same list with the identical variant text.
    pub duplicate_of: Option<usize>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopMode {
    FirstCorrect,
    Exhaustive,
}

impl std::str::FromStr for StopMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first-correct" => Ok(StopMode::FirstCorrect),
            "exhaustive" => Ok(StopMode::Exhaustive),
            other => Err(Error::Config(format!("unknown stop mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Maximum number of ranks to validate; `None` means all.
    pub budget: Option<usize>,
    pub stop: StopMode,
    /// Variants validated concurrently per batch.
    pub workers: usize,
    pub max_steps: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            budget: None,
            stop: StopMode::Exhaustive,
            workers: rayon::current_num_threads(),
            max_steps: ExecLimits::default().max_steps,
        }
    }
}

/// Shared map from variant text to its verdict.
#[derive(Debug, Default, Clone)]
pub struct VerdictCache {
    inner: Arc<Mutex<HashMap<String, VariantVerdict>>>,
}

impl VerdictCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(&self, text: &str) -> Option<VariantVerdict> {
        self.inner.lock().expect("cache lock").get(text).cloned()
    }

    fn insert(&self, text: String, verdict: VariantVerdict) {
        self.inner.lock().expect("cache lock").insert(text, verdict);
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Tokens of the developer fix, for the correctness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Oracle {
    tokens: Vec<String>,
}

impl Oracle {
    pub fn new(fixed_source: &str, grammar: &dyn Grammar) -> Result<Self> {
        grammar.parse(fixed_source)?;
        Ok(Self {
            tokens: grammar.tokens(fixed_source)?,
        })
    }

    /// Same token sequence means the same tree, node kinds and node texts up
    /// to whitespace and comments.
    pub fn matches(&self, variant: &str, grammar: &dyn Grammar) -> bool {
        grammar.tokens(variant).is_ok_and(|t| t == self.tokens)
    }
}

pub fn classify_correct(variant: &str, oracle_fix: &str, grammar: &dyn Grammar) -> Result<bool> {
    Ok(Oracle::new(oracle_fix, grammar)?.matches(variant, grammar))
}

fn executor(grammar: &dyn Grammar) -> Result<&dyn Executor> {
    grammar
        .executor()
        .ok_or_else(|| Error::Config(format!("grammar '{}' has no interpreter", grammar.id())))
}

fn run_case(exec: &dyn Executor, tree: &SourceTree, case: &TestCase, max_steps: u64) -> (TestVerdict, BTreeSet<u32>) {
    let limits = ExecLimits {
        timeout: case.timeout,
        max_steps,
    };
    let run = exec.run(tree, &case.input, &limits);
    let outcome = match run.status {
        ExecStatus::TimedOut => TestOutcome::TimedOut,
        ExecStatus::RuntimeError(msg) => TestOutcome::RuntimeError(msg),
        ExecStatus::Completed if outputs_match(&run.stdout, &case.expected) => TestOutcome::Passed,
        ExecStatus::Completed => TestOutcome::WrongOutput,
    };
    let verdict = TestVerdict {
        test_id: case.id.clone(),
        polarity: case.polarity,
        outcome,
    };
    (verdict, run.covered_lines)
}

/// Runs the suite on a variant, stopping at the first failing test, and
/// classifies it as failing or plausible. Correctness is decided separately.
pub fn validate_variant(
    variant: &str,
    suite: &TestSuite,
    grammar: &dyn Grammar,
    max_steps: u64,
) -> Result<VariantVerdict> {
    let exec = executor(grammar)?;
    let tree = match grammar.parse(variant) {
        Ok(t) => t,
        Err(e) => {
            return Ok(VariantVerdict {
                verdicts: Vec::new(),
                classification: Classification::Fails,
                note: Some(format!("does not parse: {e}")),
            })
        }
    };
    let mut verdicts = Vec::new();
    for case in suite.execution_order() {
        let (v, _) = run_case(exec, &tree, case, max_steps);
        let passed = v.passed();
        verdicts.push(v);
        if !passed {
            return Ok(VariantVerdict {
                verdicts,
                classification: Classification::Fails,
                note: None,
            });
        }
    }
    Ok(VariantVerdict {
        verdicts,
        classification: Classification::Plausible,
        note: None,
    })
}

fn full_verdict(
    variant: &str,
    suite: &TestSuite,
    grammar: &dyn Grammar,
    oracle: Option<&Oracle>,
    max_steps: u64,
) -> Result<VariantVerdict> {
    let mut v = validate_variant(variant, suite, grammar, max_steps)?;
    if v.classification == Classification::Plausible && oracle.is_some_and(|o| o.matches(variant, grammar)) {
        v.classification = Classification::Correct;
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationLog {
    pub results: Vec<ValidationResult>,
}

impl ValidationLog {
    pub fn ranks_of(&self, class: Classification) -> Vec<usize> {
        self.results
            .iter()
            .filter(|r| r.verdict.classification == class)
            .map(|r| r.rank)
            .collect()
    }

    pub fn first_correct(&self) -> Option<&ValidationResult> {
        self.results.iter().find(|r| r.verdict.classification == Classification::Correct)
    }

    pub fn first_plausible(&self) -> Option<&ValidationResult> {
        self.results.iter().find(|r| r.verdict.classification != Classification::Fails)
    }

    pub fn to_jsonl(&self) -> String {
        self.results
            .iter()
            .map(|r| serde_json::to_string(r).expect("result serializes") + "\n")
            .collect()
    }
}

/// Validates candidates in rank order. Batches of `workers` variants run in
/// parallel; results are committed in rank order and the first-correct stop
/// decision is taken on that order, so the log does not depend on scheduling.
pub fn validate_in_rank_order(
    ranked: &RankedPatchList,
    tree: &SourceTree,
    suite: &TestSuite,
    grammar: &dyn Grammar,
    oracle: Option<&Oracle>,
    options: &ValidationOptions,
    cache: &VerdictCache,
) -> Result<ValidationLog> {
    executor(grammar)?;
    let limit = options.budget.unwrap_or(usize::MAX).min(ranked.patches.len());
    let mut results = Vec::new();
    let mut first_seen: HashMap<String, usize> = HashMap::new();

    for batch in ranked.patches[..limit].chunks(options.workers.max(1)) {
        let variants: Vec<std::result::Result<String, String>> = batch
            .iter()
            .map(|p| apply_patch(tree, &p.candidate, grammar).map(|v| v.source).map_err(|e| e.to_string()))
            .collect();

        let mut pending: Vec<&str> = variants
            .iter()
            .filter_map(|v| v.as_deref().ok())
            .filter(|text| cache.get(text).is_none())
            .collect();
        pending.sort_unstable();
        pending.dedup();
        let fresh = pending
            .par_iter()
            .map(|text| {
                let start = Instant::now();
                let v = full_verdict(text, suite, grammar, oracle, options.max_steps)?;
                Ok((text.to_string(), v, start.elapsed().as_secs_f64() * 1e3))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut timing: HashMap<String, f64> = HashMap::new();
        for (text, v, ms) in fresh {
            cache.insert(text.clone(), v);
            timing.insert(text, ms);
        }

        for (p, variant) in batch.iter().zip(variants) {
            let (verdict, duplicate_of, wall_time_ms) = match variant {
                Err(note) => (
                    VariantVerdict {
                        verdicts: Vec::new(),
                        classification: Classification::Fails,
                        note: Some(note),
                    },
                    None,
                    0.0,
                ),
                Ok(text) => {
                    let v = cache.get(&text).expect("validated above");
                    let dup = first_seen.get(&text).copied();
                    let ms = if dup.is_none() { timing.remove(&text).unwrap_or(0.0) } else { 0.0 };
                    first_seen.entry(text).or_insert(p.rank);
                    (v, dup, ms)
                }
            };
            // Without an oracle nothing can be correct, so plausible is the best
            // achievable outcome and ends a first-correct run.
            let correct = match oracle {
                Some(_) => verdict.classification == Classification::Correct,
                None => verdict.classification != Classification::Fails,
            };
            results.push(ValidationResult {
                rank: p.rank,
                candidate: p.candidate.id,
                verdict,
                duplicate_of,
                wall_time_ms,
            });
            if correct && options.stop == StopMode::FirstCorrect {
                return Ok(ValidationLog { results });
            }
        }
    }
    Ok(ValidationLog { results })
}

/// Runs the suite on the original program to build its coverage matrix.
/// Every test passing is "nothing to repair"; otherwise each test's verdict
/// must agree with its declared polarity.
pub fn instrument(tree: &SourceTree, suite: &TestSuite, grammar: &dyn Grammar, max_steps: u64) -> Result<CoverageMatrix> {
    let exec = executor(grammar)?;
    let runs: Vec<(TestVerdict, BTreeSet<u32>)> = suite
        .cases()
        .par_iter()
        .map(|c| run_case(exec, tree, c, max_steps))
        .collect();
    if runs.iter().all(|(v, _)| v.passed()) {
        return Err(Error::NothingToRepair);
    }
    let mut tests = Vec::new();
    for (v, lines) in runs {
        let expected_pass = v.polarity == Polarity::Positive;
        if v.passed() != expected_pass {
            return Err(Error::Suite(format!(
                "test {} is declared {:?} but {} on the original program",
                v.test_id,
                v.polarity,
                if v.passed() { "passes" } else { "fails" }
            )));
        }
        tests.push(TestCoverage {
            verdict: if v.passed() { Verdict::Pass } else { Verdict::Fail },
            test_id: v.test_id,
            lines,
        });
    }
    let universe = executable_lines(tree, &grammar.descriptor().block_kind);
    CoverageMatrix::new(tests, universe)
}
