use crate::ast::FrequencyMap;

/// Overlap of the ingredient's kind frequencies with the faulty node's,
/// relative to the faulty node's total. Asymmetric: only kinds present in
/// `faulty` contribute. An empty faulty context scores 0.
pub fn genealogical_similarity(faulty: &FrequencyMap, ingredient: &FrequencyMap) -> f64 {
    let total = faulty.total();
    if total == 0 {
        return 0.0;
    }
    let shared: u64 = faulty
        .iter()
        .map(|(kind, count)| u64::from(count.min(ingredient.get(kind))))
        .sum();
    shared as f64 / total as f64
}
