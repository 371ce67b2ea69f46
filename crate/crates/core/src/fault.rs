//! Spectrum-based fault localization.
//!
//! Line scores use the Ochiai coefficient `ef / sqrt((ef + nf) * (ef + ep))`,
//! where `ef`/`ep` count failing/passing tests that execute the line and `nf`
//! counts failing tests that do not. A node's score is the mean of the scores
//! of the executable lines it spans.
//!
//! Coverage matrices are stored as tab-separated text:
//!
//! ```text
//! # simrepair coverage v1
//! universe	2 3 4 6
//! t01	fail	2 3 4
//! t02	pass	2 3 6
//! ```
//!
//! The `universe` record lists every executable line; each remaining record is
//! `test id`, `pass`/`fail`, and the space-separated lines the test executed.
#![allow(clippy::tabs_in_doc_comments)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ast::{AstNode, NodeId, SourceTree};
use crate::error::{Error, Result};

const HEADER: &str = "# simrepair coverage v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCoverage {
    pub test_id: String,
    pub verdict: Verdict,
    pub lines: BTreeSet<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageMatrix {
    tests: Vec<TestCoverage>,
    line_universe: BTreeSet<u32>,
}

impl CoverageMatrix {
    /// Rejects covered lines outside the universe, duplicate test ids, and
    /// matrices without a failing test (nothing to repair).
    pub fn new(tests: Vec<TestCoverage>, line_universe: BTreeSet<u32>) -> Result<Self> {
        let mut seen = HashSet::new();
        for t in &tests {
            if !seen.insert(t.test_id.as_str()) {
                return Err(Error::Coverage(format!("duplicate test id {}", t.test_id)));
            }
            if let Some(line) = t.lines.iter().find(|l| !line_universe.contains(l)) {
                return Err(Error::Coverage(format!(
                    "test {} covers line {line}, which is not executable",
                    t.test_id
                )));
            }
        }
        if !tests.iter().any(|t| t.verdict == Verdict::Fail) {
            return Err(Error::NothingToRepair);
        }
        Ok(Self {
            tests,
            line_universe,
        })
    }

    pub fn tests(&self) -> &[TestCoverage] {
        &self.tests
    }

    pub fn line_universe(&self) -> &BTreeSet<u32> {
        &self.line_universe
    }

    pub fn failing(&self) -> usize {
        self.tests.iter().filter(|t| t.verdict == Verdict::Fail).count()
    }

    /// (ef, ep, nf) for one line.
    pub fn spectrum(&self, line: u32) -> Result<(usize, usize, usize)> {
        if !self.line_universe.contains(&line) {
            return Err(Error::UnknownLine(line));
        }
        let (mut ef, mut ep, mut nf) = (0, 0, 0);
        for t in &self.tests {
            match (t.verdict, t.lines.contains(&line)) {
                (Verdict::Fail, true) => ef += 1,
                (Verdict::Fail, false) => nf += 1,
                (Verdict::Pass, true) => ep += 1,
                (Verdict::Pass, false) => {}
            }
        }
        Ok((ef, ep, nf))
    }

    pub fn to_text(&self) -> String {
        let join = |lines: &BTreeSet<u32>| {
            lines.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
        };
        let mut out = format!("{HEADER}\nuniverse\t{}\n", join(&self.line_universe));
        for t in &self.tests {
            let verdict = match t.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "fail",
            };
            let _ = writeln!(out, "{}\t{verdict}\t{}", t.test_id, join(&t.lines));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut universe = None;
        let mut tests = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Coverage(format!("line {}: {msg}", n + 1));
            let fields: Vec<&str> = line.split('\t').collect();
            let parse_lines = |s: &str| -> Result<BTreeSet<u32>> {
                s.split_whitespace()
                    .map(|l| l.parse::<u32>().map_err(|_| err(&format!("bad line number '{l}'"))))
                    .collect()
            };
            match fields.as_slice() {
                ["universe", rest @ ..] if rest.len() <= 1 => {
                    if universe.is_some() {
                        return Err(err("second universe record"));
                    }
                    universe = Some(parse_lines(rest.first().copied().unwrap_or(""))?);
                }
                [id, verdict, rest @ ..] if rest.len() <= 1 => {
                    let verdict = match *verdict {
                        "pass" => Verdict::Pass,
                        "fail" => Verdict::Fail,
                        other => return Err(err(&format!("verdict must be pass or fail, not '{other}'"))),
                    };
                    tests.push(TestCoverage {
                        test_id: id.to_string(),
                        verdict,
                        lines: parse_lines(rest.first().copied().unwrap_or(""))?,
                    });
                }
                _ => return Err(err("expected `id<TAB>verdict<TAB>lines`")),
            }
        }
        let universe = universe.ok_or_else(|| Error::Coverage("missing universe record".into()))?;
        CoverageMatrix::new(tests, universe)
    }
}

/// Ochiai coefficient; 0 whenever no failing test executes the line.
pub fn ochiai(ef: usize, ep: usize, nf: usize) -> f64 {
    if ef == 0 {
        return 0.0;
    }
    let denom = (((ef + nf) * (ef + ep)) as f64).sqrt();
    (ef as f64 / denom).min(1.0)
}

pub fn ochiai_line_score(line: u32, matrix: &CoverageMatrix) -> Result<f64> {
    let (ef, ep, nf) = matrix.spectrum(line)?;
    Ok(ochiai(ef, ep, nf))
}

/// Line -> suspiciousness for every executable line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuspiciousnessMap {
    pub lines: BTreeMap<u32, f64>,
}

impl SuspiciousnessMap {
    pub fn from_matrix(matrix: &CoverageMatrix) -> Self {
        let lines = matrix
            .line_universe()
            .iter()
            .map(|&l| (l, ochiai_line_score(l, matrix).expect("line from universe")))
            .collect();
        Self { lines }
    }

    pub fn get(&self, line: u32) -> Option<f64> {
        self.lines.get(&line).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeScore {
    pub score: f64,
    /// Set when the node spans no executable line.
    pub no_executable_line: bool,
}

/// Mean suspiciousness over the executable lines a node spans.
pub fn node_suspiciousness(node: &AstNode, susp: &SuspiciousnessMap) -> NodeScore {
    let scores: Vec<f64> = node.span.lines().filter_map(|l| susp.get(l)).collect();
    if scores.is_empty() {
        return NodeScore {
            score: 0.0,
            no_executable_line: true,
        };
    }
    NodeScore {
        score: scores.iter().sum::<f64>() / scores.len() as f64,
        no_executable_line: false,
    }
}

/// Expression and Expression-Statement nodes with positive suspiciousness,
/// most suspicious first; ties go to the earlier start line, then the smaller id.
pub fn rank_faulty_nodes(tree: &SourceTree, matrix: &CoverageMatrix) -> Result<Vec<(NodeId, f64)>> {
    let susp = SuspiciousnessMap::from_matrix(matrix);
    let mut ranked: Vec<(NodeId, f64)> = tree
        .iter()
        .filter(|n| n.category.is_ingredient())
        .filter_map(|n| {
            let s = node_suspiciousness(n, &susp);
            if s.no_executable_line {
                log::debug!("{} ({}) spans no executable line", n.id, n.kind);
            }
            (s.score > 0.0).then_some((n.id, s.score))
        })
        .collect();
    if ranked.is_empty() {
        return Err(Error::NoSuspiciousNode);
    }
    ranked.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| tree.node(a.0).span.start_line.cmp(&tree.node(b.0).span.start_line))
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cov(id: &str, verdict: Verdict, lines: &[u32]) -> TestCoverage {
        TestCoverage {
            test_id: id.into(),
            verdict,
            lines: lines.iter().copied().collect(),
        }
    }

    fn universe(lines: &[u32]) -> BTreeSet<u32> {
        lines.iter().copied().collect()
    }

    #[test]
    fn ochiai_pins() {
        assert!((ochiai(2, 1, 0) - 2.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((ochiai(2, 1, 0) - 0.8165).abs() < 1e-4);
        assert_eq!(ochiai(0, 5, 2), 0.0);
        assert_eq!(ochiai(0, 0, 0), 0.0);
        assert_eq!(ochiai(3, 0, 0), 1.0);
    }

    #[test]
    fn line_score_from_matrix() {
        let m = CoverageMatrix::new(
            vec![
                cov("a", Verdict::Fail, &[1, 2]),
                cov("b", Verdict::Fail, &[1]),
                cov("c", Verdict::Pass, &[1, 3]),
            ],
            universe(&[1, 2, 3]),
        )
        .unwrap();
        assert!((ochiai_line_score(1, &m).unwrap() - 2.0 / 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(ochiai_line_score(3, &m).unwrap(), 0.0);
        assert!(matches!(ochiai_line_score(9, &m), Err(Error::UnknownLine(9))));
    }

    #[test]
    fn matrix_requires_a_failing_test() {
        let err = CoverageMatrix::new(vec![cov("a", Verdict::Pass, &[1])], universe(&[1])).unwrap_err();
        assert!(matches!(err, Error::NothingToRepair));
    }

    #[test]
    fn matrix_rejects_lines_outside_universe() {
        let err = CoverageMatrix::new(vec![cov("a", Verdict::Fail, &[7])], universe(&[1])).unwrap_err();
        assert!(matches!(err, Error::Coverage(_)));
    }

    #[test]
    fn text_format_round_trip() {
        let m = CoverageMatrix::new(
            vec![cov("t1", Verdict::Fail, &[2, 3]), cov("t2", Verdict::Pass, &[])],
            universe(&[2, 3, 5]),
        )
        .unwrap();
        let text = m.to_text();
        assert_eq!(text, "# simrepair coverage v1\nuniverse\t2 3 5\nt1\tfail\t2 3\nt2\tpass\t\n");
        assert_eq!(CoverageMatrix::parse(&text).unwrap(), m);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = CoverageMatrix::parse("universe\t1\nt1\tmaybe\t1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(CoverageMatrix::parse("t1\tfail\t1\n").is_err());
    }
}
