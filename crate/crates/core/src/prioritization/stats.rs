use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::similarity::CombinationStrategy;

/// Validation outcome of one ranked list: which ranks turned out correct or
/// plausible but incorrect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub bug: String,
    pub strategy: CombinationStrategy,
    pub total_patches: usize,
    pub validated: usize,
    pub correct_ranks: Vec<usize>,
    pub plausible_incorrect_ranks: Vec<usize>,
    /// No oracle fix, so nothing can be classified correct.
    pub correctness_capped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub bug: String,
    pub strategy: CombinationStrategy,
    pub total_patches: usize,
    pub validated: usize,
    pub correct_ranks: Vec<usize>,
    pub first_correct_rank: Option<usize>,
    pub plausible_incorrect_ranks: Vec<usize>,
    pub correctness_capped: bool,
}

impl ReportRow {
    pub fn has_plausible(&self) -> bool {
        !self.correct_ranks.is_empty() || !self.plausible_incorrect_ranks.is_empty()
    }

    /// First correct patch ranks before every plausible-incorrect one.
    pub fn correct_first(&self) -> bool {
        match (self.first_correct_rank, self.plausible_incorrect_ranks.iter().min()) {
            (Some(c), Some(&p)) => c < p,
            (Some(_), None) => true,
            (None, _) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: CombinationStrategy,
    pub median_first_correct: Option<f64>,
    /// Undefined when no bug has a plausible patch.
    pub precision: Option<f64>,
    pub repaired: usize,
    pub bugs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// Bug-major, strategies in canonical order within a bug.
    pub rows: Vec<ReportRow>,
    pub summaries: Vec<StrategySummary>,
}

/// Median with the two middle values averaged for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

fn strategy_order(s: CombinationStrategy) -> usize {
    CombinationStrategy::ALL.iter().position(|&x| x == s).expect("canonical strategy")
}

fn join_ranks(ranks: &[usize]) -> String {
    ranks.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentReport {
    /// Per-bug rows plus per-strategy aggregates. Bugs without a correct patch
    /// count as unrepaired and stay out of the median.
    pub fn from_cells(cells: Vec<CellOutcome>) -> Self {
        let mut rows: Vec<ReportRow> = cells
            .into_iter()
            .map(|c| {
                let mut correct = c.correct_ranks;
                correct.sort_unstable();
                let mut plausible = c.plausible_incorrect_ranks;
                plausible.sort_unstable();
                ReportRow {
                    first_correct_rank: correct.first().copied(),
                    bug: c.bug,
                    strategy: c.strategy,
                    total_patches: c.total_patches,
                    validated: c.validated,
                    correct_ranks: correct,
                    plausible_incorrect_ranks: plausible,
                    correctness_capped: c.correctness_capped,
                }
            })
            .collect();
        rows.sort_by(|a, b| a.bug.cmp(&b.bug).then(strategy_order(a.strategy).cmp(&strategy_order(b.strategy))));

        let mut by_strategy: BTreeMap<usize, Vec<&ReportRow>> = BTreeMap::new();
        for r in &rows {
            by_strategy.entry(strategy_order(r.strategy)).or_default().push(r);
        }
        let summaries = by_strategy
            .into_values()
            .map(|rs| {
                let firsts: Vec<f64> = rs.iter().filter_map(|r| r.first_correct_rank).map(|r| r as f64).collect();
                let with_plausible = rs.iter().filter(|r| r.has_plausible()).count();
                let correct_first = rs.iter().filter(|r| r.has_plausible() && r.correct_first()).count();
                StrategySummary {
                    strategy: rs[0].strategy,
                    median_first_correct: median(&firsts),
                    precision: (with_plausible > 0).then(|| correct_first as f64 / with_plausible as f64),
                    repaired: firsts.len(),
                    bugs: rs.len(),
                }
            })
            .collect();
        ExperimentReport { rows, summaries }
    }

    pub fn summary(&self, strategy: CombinationStrategy) -> Option<&StrategySummary> {
        self.summaries.iter().find(|s| s.strategy == strategy)
    }

    /// Rows first, then one summary record per strategy.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let mut v = serde_json::to_value(r).expect("row serializes");
            v["record"] = "row".into();
            out.push_str(&v.to_string());
            out.push('\n');
        }
        for s in &self.summaries {
            let mut v = serde_json::to_value(s).expect("summary serializes");
            v["record"] = "summary".into();
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    /// Two fixed-width tables, combined strategies then baselines, with
    /// TP (total patches) and CPR (correct patch ranks) per strategy.
    pub fn to_text(&self) -> String {
        let mut bugs: Vec<&str> = self.rows.iter().map(|r| r.bug.as_str()).collect();
        bugs.dedup();
        let bug_w = bugs.iter().map(|b| b.len()).max().unwrap_or(3).max(6);
        let mut out = String::new();
        let groups: [(&str, Vec<CombinationStrategy>); 2] = [
            ("Combined strategies", CombinationStrategy::COMBINED.to_vec()),
            (
                "Baseline strategies",
                CombinationStrategy::ALL.iter().copied().filter(|s| !s.is_combined()).collect(),
            ),
        ];
        for (title, strategies) in groups {
            let strategies: Vec<_> = strategies.into_iter().filter(|&s| self.summary(s).is_some()).collect();
            if strategies.is_empty() {
                continue;
            }
            let _ = writeln!(out, "{title}");
            let cpr_of = |r: &ReportRow| if r.correct_ranks.is_empty() { "-".to_owned() } else { join_ranks(&r.correct_ranks) };
            // CPR column grows to the longest rank list of its strategy.
            let cpr_w: Vec<usize> = strategies
                .iter()
                .map(|&s| self.rows.iter().filter(|r| r.strategy == s).map(|r| cpr_of(r).len()).max().unwrap_or(0).max(11))
                .collect();
            let mut header = format!("{:<bug_w$}", "Bug");
            let mut sub = format!("{:<bug_w$}", "");
            for (s, &w) in strategies.iter().zip(&cpr_w) {
                let _ = write!(header, " | {:<cell$}", s.label(), cell = w + 6);
                let _ = write!(sub, " | {:>5} {:<w$}", "TP", "CPR");
            }
            let _ = writeln!(out, "{}", header.trim_end());
            let _ = writeln!(out, "{}", sub.trim_end());
            let _ = writeln!(out, "{}", "-".repeat(sub.len()));
            for bug in &bugs {
                let mut line = format!("{bug:<bug_w$}");
                for (&s, &w) in strategies.iter().zip(&cpr_w) {
                    match self.rows.iter().find(|r| r.bug == *bug && r.strategy == s) {
                        Some(r) => {
                            let _ = write!(line, " | {:>5} {:<w$}", r.total_patches, cpr_of(r));
                        }
                        None => {
                            let _ = write!(line, " | {:>5} {:<w$}", "", "");
                        }
                    }
                }
                let _ = writeln!(out, "{}", line.trim_end());
            }
            let _ = writeln!(out, "{}", "-".repeat(sub.len()));
            for (label, f) in [
                ("Median", (|s: &StrategySummary| s.median_first_correct.map_or("-".into(), |m| format!("{m}"))) as fn(&StrategySummary) -> String),
                ("Precision", |s: &StrategySummary| s.precision.map_or("-".into(), |p| format!("{:.1}%", p * 100.0))),
                ("Repaired", |s: &StrategySummary| format!("{}/{}", s.repaired, s.bugs)),
            ] {
                let _ = write!(out, "{label:<bug_w$}");
                for (&s, &w) in strategies.iter().zip(&cpr_w) {
                    let _ = write!(out, " | {:>cell$}", f(self.summary(s).expect("filtered above")), cell = w + 6);
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }

    /// `bug,strategy,first_correct_rank` with an empty rank for unrepaired bugs.
    pub fn first_correct_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["bug", "strategy", "first_correct_rank"]).expect("in-memory write");
        for r in &self.rows {
            let rank = r.first_correct_rank.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([r.bug.as_str(), r.strategy.id(), &rank]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    /// One line per recorded plausible rank: `strategy,bug,rank,class`.
    pub fn rank_distribution_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["strategy", "bug", "rank", "class"]).expect("in-memory write");
        for r in &self.rows {
            let mut marks: Vec<(usize, &str)> = r.correct_ranks.iter().map(|&x| (x, "correct")).collect();
            marks.extend(r.plausible_incorrect_ranks.iter().map(|&x| (x, "plausible")));
            marks.sort();
            for (rank, class) in marks {
                w.write_record([r.strategy.id(), r.bug.as_str(), &rank.to_string(), class]).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(bug: &str, s: CombinationStrategy, correct: &[usize], plausible: &[usize]) -> CellOutcome {
        CellOutcome {
            bug: bug.into(),
            strategy: s,
            total_patches: 100,
            validated: 100,
            correct_ranks: correct.to_vec(),
            plausible_incorrect_ranks: plausible.to_vec(),
            correctness_capped: false,
        }
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[45.0]), Some(45.0));
        assert_eq!(median(&[27.0, 44.0, 30.0, 90.0, 46.0, 96.0]), Some(45.0));
        assert_eq!(median(&[]), None);
    }

    /// Six-bug first-correct rank columns and their medians.
    #[test]
    fn six_bug_medians() {
        let columns: [(&[f64], f64); 8] = [
            (&[27.0, 44.0, 30.0, 90.0, 46.0, 96.0], 45.0),
            (&[51.0, 60.0, 27.0, 27.0, 46.0, 90.0], 48.5),
            (&[34.0, 59.0, 35.0, 86.0, 48.0, 93.0], 53.5),
            (&[107.0, 110.0, 299.0, 170.0, 157.0, 310.0], 163.5),
            (&[342.0, 287.0, 26.0, 113.0, 48.0, 241.0], 177.0),
            // (42 + 70) / 2, not 55.
            (&[23.0, 42.0, 26.0, 130.0, 70.0, 124.0], 56.0),
            (&[42.0, 52.0, 37.0, 140.0, 58.0, 121.0], 55.0),
            (&[67.0, 81.0, 26.0, 26.0, 50.0, 110.0], 58.5),
        ];
        for (ranks, expected) in columns {
            assert_eq!(median(ranks), Some(expected), "{ranks:?}");
        }
    }

    #[test]
    fn precision_counts_bugs_with_plausible() {
        use CombinationStrategy::ComCs;
        let report = ExperimentReport::from_cells(vec![
            cell("a", ComCs, &[1], &[]),
            cell("b", ComCs, &[5], &[3]),
            cell("c", ComCs, &[], &[]),
            cell("d", ComCs, &[], &[2]),
        ]);
        let s = report.summary(ComCs).unwrap();
        assert_eq!(s.precision, Some(1.0 / 3.0));
        assert_eq!(s.repaired, 2);
        assert_eq!(s.median_first_correct, Some(3.0));
    }

    #[test]
    fn single_bug_correct_first() {
        let report = ExperimentReport::from_cells(vec![cell("a", CombinationStrategy::Lba, &[1], &[])]);
        assert_eq!(report.summary(CombinationStrategy::Lba).unwrap().precision, Some(1.0));
    }

    #[test]
    fn multi_rank_cells_render() {
        let report = ExperimentReport::from_cells(vec![
            cell("bug1", CombinationStrategy::ComCs, &[68, 44], &[]),
            cell("bug1", CombinationStrategy::Ssba, &[2], &[]),
        ]);
        assert_eq!(report.rows[0].correct_ranks, [44, 68]);
        let text = report.to_text();
        assert!(text.contains("44,68"), "{text}");
        assert!(text.contains("Baseline strategies"));
        assert_eq!(report.first_correct_csv(), "bug,strategy,first_correct_rank\nbug1,com-cs,44\nbug1,ssba,2\n");
    }
}
