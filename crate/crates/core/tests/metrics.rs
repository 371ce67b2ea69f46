mod common;

use common::{cosine_oracle, ed_oracle, jaccard_oracle, lcs_oracle, ned_oracle, nlcs_oracle};
use proptest::prelude::*;
use simrepair_core::ast::FrequencyMap;
use simrepair_core::similarity::{
    cosine_similarity, edit_distance, genealogical_similarity, jaccard_similarity, lcs_length, normalized_edit_distance,
    normalized_lcs,
};

/// Short strings over an alphabet that exercises identifiers, numbers,
/// multi-char operators, whitespace and a non-ASCII letter.
fn short() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop::sample::select(vec!['a', 'b', 'x', '_', '1', '2', '.', '=', '!', '<', '+', '-', '&', '|', '(', ' ', 'é']),
        0..=10,
    )
    .prop_map(|v| v.into_iter().collect())
}

fn kinds() -> impl Strategy<Value = FrequencyMap> {
    proptest::collection::vec((prop::sample::select(vec!["Block", "IfStatement", "Assignment", "SimpleName"]), 0u32..4), 0..5)
        .prop_map(|pairs| {
            let mut m = FrequencyMap::new();
            for (k, c) in pairs {
                m.add(k, c);
            }
            m
        })
}

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn lcs_matches_recursive_oracle(a in short(), b in short()) {
        prop_assert_eq!(lcs_length(&chars(&a), &chars(&b)), lcs_oracle(&chars(&a), &chars(&b)));
        prop_assert_eq!(normalized_lcs(&a, &b), nlcs_oracle(&a, &b));
    }

    #[test]
    fn edit_distance_matches_recursive_oracle(a in short(), b in short()) {
        prop_assert_eq!(edit_distance(&chars(&a), &chars(&b)), ed_oracle(&chars(&a), &chars(&b)));
        prop_assert_eq!(normalized_edit_distance(&a, &b), ned_oracle(&a, &b));
    }

    #[test]
    fn cosine_and_jaccard_match_recomputation(a in short(), b in short(), n in 1usize..4) {
        prop_assert!((cosine_similarity(&a, &b) - cosine_oracle(&a, &b)).abs() <= 1e-12);
        prop_assert!((jaccard_similarity(&a, &b, n) - jaccard_oracle(&a, &b, n)).abs() <= 1e-12);
    }

    #[test]
    fn string_metrics_are_bounded_and_symmetric(a in short(), b in short()) {
        for (name, m) in [
            ("lcs", normalized_lcs as fn(&str, &str) -> f64),
            ("ned", normalized_edit_distance),
            ("cos", cosine_similarity),
            ("jac", |x: &str, y: &str| jaccard_similarity(x, y, 2)),
        ] {
            let ab = m(&a, &b);
            prop_assert!((0.0..=1.0).contains(&ab), "{} out of range: {}", name, ab);
            prop_assert_eq!(ab, m(&b, &a), "{} not symmetric", name);
        }
    }

    #[test]
    fn identity_scores_one(a in short()) {
        prop_assert_eq!(normalized_lcs(&a, &a), 1.0);
        prop_assert_eq!(normalized_edit_distance(&a, &a), 1.0);
        prop_assert_eq!(jaccard_similarity(&a, &a, 2), 1.0);
        // Cosine needs at least one term to have a direction.
        if !a.trim().is_empty() {
            prop_assert_eq!(cosine_similarity(&a, &a), 1.0);
        }
    }

    #[test]
    fn edit_distance_is_lcs_complement(a in short(), b in short()) {
        let (ca, cb) = (chars(&a), chars(&b));
        prop_assert_eq!(edit_distance(&ca, &cb), ca.len() + cb.len() - 2 * lcs_length(&ca, &cb));
    }

    #[test]
    fn genealogical_is_bounded_with_identity(f in kinds(), g in kinds()) {
        let s = genealogical_similarity(&f, &g);
        prop_assert!((0.0..=1.0).contains(&s));
        if !f.is_empty() {
            prop_assert_eq!(genealogical_similarity(&f, &f), 1.0);
            // Any superset context covers the faulty one completely.
            prop_assert_eq!(genealogical_similarity(&f, &f.merged(&g)), 1.0);
        }
    }
}

#[test]
fn genealogical_asymmetry_witness() {
    let f = FrequencyMap::from([("Block", 2), ("IfStatement", 1)]);
    let e = FrequencyMap::from([("Block", 1), ("IfStatement", 1)]);
    assert!((genealogical_similarity(&f, &e) - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(genealogical_similarity(&e, &f), 1.0);
}

#[test]
fn hand_computed_pins() {
    assert_eq!(normalized_lcs("abcd", "abdc"), 0.75);
    assert_eq!(edit_distance(&chars("kitten"), &chars("sitting")), 5);
    assert!((normalized_edit_distance("kitten", "sitting") - 2.0 / 7.0).abs() < 1e-15);
    assert_eq!(normalized_edit_distance("a", "bc"), 0.0);
    assert_eq!(jaccard_similarity("abcd", "abce", 2), 0.5);
    // Terms x,=,x,+,y against x,=,y: counts (2,1,1,1) and (1,1,0,1) over x,=,+,y.
    let expected = (2.0 + 1.0 + 1.0) / (7f64.sqrt() * 3f64.sqrt());
    assert!((cosine_similarity("x = x + y", "x = y") - expected).abs() < 1e-15);
}
