mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use simrepair_core::ast::{executable_lines, SourceTree};
use simrepair_core::fault::{
    node_suspiciousness, ochiai, ochiai_line_score, rank_faulty_nodes, CoverageMatrix, SuspiciousnessMap, TestCoverage,
    Verdict,
};
use simrepair_core::grammar::mini::MiniGrammar;
use simrepair_core::grammar::Grammar;

const PROGRAM: &str = "int f(int a) {
    int b = 0;
    if (a > 1) {
        b = a + 1;
        print(b,
              a);
    }
    while (b > 0) {
        b = b - 1;
    }
    return b;
}
";

fn tree() -> SourceTree {
    MiniGrammar::new().parse(PROGRAM).unwrap()
}

fn universe() -> BTreeSet<u32> {
    executable_lines(&tree(), "Block")
}

/// Random rows over the program's executable lines; the first row always fails.
fn rows() -> impl Strategy<Value = Vec<(bool, Vec<bool>)>> {
    let width = universe().len();
    proptest::collection::vec((any::<bool>(), proptest::collection::vec(any::<bool>(), width)), 1..8).prop_map(|mut v| {
        v[0].0 = true;
        v
    })
}

fn matrix(rows: &[(bool, Vec<bool>)]) -> CoverageMatrix {
    let lines: Vec<u32> = universe().into_iter().collect();
    let tests = rows
        .iter()
        .enumerate()
        .map(|(i, (fail, covered))| TestCoverage {
            test_id: format!("t{i}"),
            verdict: if *fail { Verdict::Fail } else { Verdict::Pass },
            lines: lines.iter().zip(covered).filter(|(_, c)| **c).map(|(l, _)| *l).collect(),
        })
        .collect();
    CoverageMatrix::new(tests, universe()).unwrap()
}

proptest! {
    #[test]
    fn extra_failing_test_never_lowers_a_covered_line(rows in rows(), pick in any::<prop::sample::Index>()) {
        let lines: Vec<u32> = universe().into_iter().collect();
        let target = pick.index(lines.len());
        let before = ochiai_line_score(lines[target], &matrix(&rows)).unwrap();
        let mut more = rows.clone();
        let mut covered = vec![false; lines.len()];
        covered[target] = true;
        more.push((true, covered));
        let after = ochiai_line_score(lines[target], &matrix(&more)).unwrap();
        prop_assert!(after >= before, "{} -> {}", before, after);
    }

    #[test]
    fn test_order_does_not_matter(rows in rows()) {
        let mut reversed = rows.clone();
        reversed.reverse();
        let (m1, m2) = (matrix(&rows), matrix(&reversed));
        prop_assert_eq!(SuspiciousnessMap::from_matrix(&m1), SuspiciousnessMap::from_matrix(&m2));
        let t = tree();
        match (rank_faulty_nodes(&t, &m1), rank_faulty_nodes(&t, &m2)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "ranking succeeded for only one order"),
        }
    }

    #[test]
    fn node_score_lies_within_its_line_scores(rows in rows()) {
        let susp = SuspiciousnessMap::from_matrix(&matrix(&rows));
        let t = tree();
        for node in t.iter() {
            let lines: Vec<f64> = node.span.lines().filter_map(|l| susp.get(l)).collect();
            let s = node_suspiciousness(node, &susp);
            if lines.is_empty() {
                prop_assert!(s.no_executable_line);
                continue;
            }
            let lo = lines.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = lines.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(s.score >= lo - 1e-12 && s.score <= hi + 1e-12);
        }
    }

    #[test]
    fn ochiai_is_a_probability(ef in 0usize..20, ep in 0usize..20, nf in 0usize..20) {
        let s = ochiai(ef, ep, nf);
        prop_assert!((0.0..=1.0).contains(&s));
    }
}

#[test]
fn multi_line_node_averages_executable_lines() {
    // The call spans lines 5 and 6; line 6 starts the argument `a`.
    let t = tree();
    let call = t.iter().find(|n| n.kind == "ExpressionStatement" && n.text.starts_with("print")).unwrap();
    assert_eq!((call.span.start_line, call.span.end_line), (5, 6));
    let ifs = t.iter().find(|n| n.kind == "IfStatement").unwrap();
    assert_eq!((ifs.span.start_line, ifs.span.end_line), (3, 7));

    // t0 fails covering 3,4,5; t1 fails covering 3; t2 passes covering 3,4.
    let m = CoverageMatrix::new(
        vec![
            TestCoverage { test_id: "t0".into(), verdict: Verdict::Fail, lines: [2, 3, 4, 5].into() },
            TestCoverage { test_id: "t1".into(), verdict: Verdict::Fail, lines: [2, 3].into() },
            TestCoverage { test_id: "t2".into(), verdict: Verdict::Pass, lines: [2, 3, 4].into() },
        ],
        universe(),
    )
    .unwrap();
    let susp = SuspiciousnessMap::from_matrix(&m);
    // line 3: ef=2 ep=1 nf=0 -> 2/sqrt(6); line 4: ef=1 ep=1 nf=1 -> 1/2;
    // line 5: ef=1 ep=0 nf=1 -> 1/sqrt(2); line 6 is never covered -> 0;
    // line 7 holds only a brace and is not executable.
    let l3 = 2.0 / 6f64.sqrt();
    let l5 = 1.0 / 2f64.sqrt();
    assert!(!universe().contains(&7));
    assert!((node_suspiciousness(call, &susp).score - l5 / 2.0).abs() < 1e-12);
    assert!((node_suspiciousness(ifs, &susp).score - (l3 + 0.5 + l5) / 4.0).abs() < 1e-12);
}

#[test]
fn corpus_node_score_matches_brute_force() {
    let b = common::bundle("median_seed_01");
    let susp = SuspiciousnessMap::from_matrix(&b.coverage);
    let mut checked = 0;
    for node in b.tree.iter().filter(|n| n.span.end_line - n.span.start_line == 2) {
        let mut sum = 0.0;
        let mut count = 0;
        for line in node.span.lines() {
            if !b.coverage.line_universe().contains(&line) {
                continue;
            }
            let ef = b.coverage.tests().iter().filter(|t| t.verdict == Verdict::Fail && t.lines.contains(&line)).count();
            let ep = b.coverage.tests().iter().filter(|t| t.verdict == Verdict::Pass && t.lines.contains(&line)).count();
            let f = b.coverage.tests().iter().filter(|t| t.verdict == Verdict::Fail).count();
            if ef > 0 {
                sum += ef as f64 / ((f * (ef + ep)) as f64).sqrt();
            }
            count += 1;
        }
        let expected = sum / count as f64;
        assert!((node_suspiciousness(node, &susp).score - expected).abs() < 1e-12, "{}", node.text);
        checked += 1;
    }
    assert!(checked >= 3, "only {checked} three-line nodes");
}

/// Every node on a line shares the line's score, so position is counted over
/// distinct start lines in ranking order.
#[test]
fn true_faulty_node_is_in_the_top_five() {
    for id in common::CORPUS_IDS {
        let p = common::prepared(id);
        let oracle = p.bundle.oracle.as_ref().unwrap();
        let g = p.bundle.grammar.as_ref();
        let mut lines: Vec<u32> = Vec::new();
        for (n, _) in &p.faulty {
            let l = p.bundle.tree.node(*n).span.start_line;
            if !lines.contains(&l) {
                lines.push(l);
            }
        }
        let position = p
            .candidates
            .iter()
            .filter(|c| oracle.matches(&p.variant_source(c).unwrap(), g))
            .map(|c| {
                let l = p.bundle.tree.node(c.faulty_node).span.start_line;
                lines.iter().position(|&x| x == l).unwrap()
            })
            .min()
            .unwrap_or_else(|| panic!("{id}: no candidate reproduces the fix"));
        assert!(position < 5, "{id}: true faulty line at position {}", position + 1);
    }
}
