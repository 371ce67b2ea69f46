//! Helpers shared by the integration tests: corpus access and independent
//! oracles for the string metrics. The oracles deliberately avoid the
//! library's algorithms (plain recursion, regex tokenization, string sets).
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;
use std::sync::OnceLock;

use regex::Regex;
use simrepair_core::harness::{ingest_bundle, prepare, BugBundle, PreparedBug, RepairSettings};
use simrepair_core::validation::ValidationOptions;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn bundle(id: &str) -> BugBundle {
    ingest_bundle(&corpus_dir().join(id), ValidationOptions::default().max_steps).expect("corpus bundle loads")
}

pub fn prepared(id: &str) -> PreparedBug {
    prepare(bundle(id), &RepairSettings::default()).expect("corpus bundle prepares")
}

pub const CORPUS_IDS: [&str; 6] = [
    "digits_seed_01",
    "grade_seed_01",
    "median_seed_01",
    "median_seed_02",
    "smallest_seed_01",
    "smallest_seed_02",
];

/// LCS length by exhaustive recursion, no table.
pub fn lcs_oracle(a: &[char], b: &[char]) -> usize {
    match (a.split_first(), b.split_first()) {
        (Some((x, ra)), Some((y, rb))) => {
            if x == y {
                1 + lcs_oracle(ra, rb)
            } else {
                lcs_oracle(ra, b).max(lcs_oracle(a, rb))
            }
        }
        _ => 0,
    }
}

/// Edit distance (insert 1, delete 1, substitute 2) by memoized recursion on
/// suffix positions.
pub fn ed_oracle(a: &[char], b: &[char]) -> usize {
    fn go(a: &[char], b: &[char], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let sub = go(a, b, i + 1, j + 1, memo) + if a[i] == b[j] { 0 } else { 2 };
        let del = go(a, b, i + 1, j, memo) + 1;
        let ins = go(a, b, i, j + 1, memo) + 1;
        let v = sub.min(del).min(ins);
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

pub fn nlcs_oracle(a: &str, b: &str) -> f64 {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let m = a.len().max(b.len());
    if m == 0 {
        1.0
    } else {
        lcs_oracle(&a, &b) as f64 / m as f64
    }
}

pub fn ned_oracle(a: &str, b: &str) -> f64 {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let m = a.len().max(b.len());
    if m == 0 {
        1.0
    } else {
        (1.0 - ed_oracle(&a, &b) as f64 / m as f64).clamp(0.0, 1.0)
    }
}

fn term_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"[\p{Alphabetic}_][\p{Alphabetic}\p{Nd}\p{Nl}\p{No}_]*|[0-9]+(?:\.[0-9]+)?|==|!=|<=|>=|&&|\|\||\+=|-=|\*=|/=|%=|\+\+|--|\S",
        )
        .unwrap()
    })
}

/// Cosine over term counts from a regex tokenizer, with float norms.
pub fn cosine_oracle(a: &str, b: &str) -> f64 {
    let count = |s: &str| {
        let mut m: HashMap<String, f64> = HashMap::new();
        for t in term_regex().find_iter(s) {
            *m.entry(t.as_str().to_owned()).or_default() += 1.0;
        }
        m
    };
    let (ca, cb) = (count(a), count(b));
    let dot: f64 = ca.iter().map(|(k, v)| v * cb.get(k).copied().unwrap_or(0.0)).sum();
    let na = ca.values().map(|v| v * v).sum::<f64>().sqrt();
    let nb = cb.values().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Jaccard over sets of owned n-char strings.
pub fn jaccard_oracle(a: &str, b: &str, n: usize) -> f64 {
    let grams = |s: &str| -> HashSet<String> {
        let cs: Vec<char> = s.chars().collect();
        (0..cs.len().saturating_sub(n - 1))
            .filter(|&i| i + n <= cs.len())
            .map(|i| cs[i..i + n].iter().collect())
            .collect()
    };
    let (ga, gb) = (grams(a), grams(b));
    let union = ga.union(&gb).count();
    if union == 0 {
        1.0
    } else {
        ga.intersection(&gb).count() as f64 / union as f64
    }
}
