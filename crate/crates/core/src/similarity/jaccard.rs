use std::collections::BTreeSet;

/// Distinct character n-grams. Strings shorter than `n` have none.
pub fn char_ngrams(text: &str, n: usize) -> BTreeSet<&str> {
    assert!(n >= 1, "n-gram size must be at least 1");
    let bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).chain([text.len()]).collect();
    bounds
        .windows(n + 1)
        .map(|w| &text[w[0]..w[n]])
        .collect()
}

/// |A ∩ B| / |A ∪ B| over character n-gram sets. Two empty sets are identical.
pub fn jaccard_similarity(a: &str, b: &str, n: usize) -> f64 {
    let ga = char_ngrams(a, n);
    let gb = char_ngrams(b, n);
    let union = ga.union(&gb).count();
    if union == 0 {
        return 1.0;
    }
    ga.intersection(&gb).count() as f64 / union as f64
}
