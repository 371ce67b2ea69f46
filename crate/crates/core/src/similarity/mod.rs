//! Contextual-similarity metrics between a faulty node and a fixing ingredient.
//!
//! One semantic metric (genealogical similarity over AST kind frequencies) and
//! four syntactic string metrics over whitespace-normalized renderings. Every
//! metric maps into [0, 1].

mod cosine;
mod edit;
mod genealogical;
mod jaccard;
mod lcs;
mod strategy;

use serde::{Deserialize, Serialize};

use crate::ast::FrequencyMap;

pub use cosine::{cosine_similarity, terms, TokenVector};
pub use edit::{edit_distance, normalized_edit_distance};
pub use genealogical::genealogical_similarity;
pub use jaccard::{char_ngrams, jaccard_similarity};
pub use lcs::{lcs_length, normalized_lcs};
pub use strategy::{combine, CombinationStrategy, Metric};

pub const DEFAULT_NGRAM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityVector {
    pub gen_s: f64,
    pub n_lcs: f64,
    pub cos_s: f64,
    pub n_ed: f64,
    pub jac_s: f64,
}

impl SimilarityVector {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Genealogical => self.gen_s,
            Metric::Lcs => self.n_lcs,
            Metric::Cosine => self.cos_s,
            Metric::EditDistance => self.n_ed,
            Metric::Jaccard => self.jac_s,
        }
    }

    pub fn set(&mut self, metric: Metric, value: f64) {
        match metric {
            Metric::Genealogical => self.gen_s = value,
            Metric::Lcs => self.n_lcs = value,
            Metric::Cosine => self.cos_s = value,
            Metric::EditDistance => self.n_ed = value,
            Metric::Jaccard => self.jac_s = value,
        }
    }

    /// All five metrics for one (faulty node, ingredient) pair. `faulty_text`
    /// and `ingredient_text` are the raw renderings; they are
    /// whitespace-normalized here.
    pub fn compute(
        faulty_kinds: &FrequencyMap,
        ingredient_kinds: &FrequencyMap,
        faulty_text: &str,
        ingredient_text: &str,
        ngram: usize,
    ) -> Self {
        let a = normalize_whitespace(faulty_text);
        let b = normalize_whitespace(ingredient_text);
        SimilarityVector {
            gen_s: genealogical_similarity(faulty_kinds, ingredient_kinds),
            n_lcs: normalized_lcs(&a, &b),
            cos_s: cosine_similarity(&a, &b),
            n_ed: normalized_edit_distance(&a, &b),
            jac_s: jaccard_similarity(&a, &b, ngram),
        }
    }
}

/// Collapses every whitespace run to one space and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize_whitespace("  if (a)\n\t{  b; }\n"), "if (a) { b; }");
        assert_eq!(normalize_whitespace(""), "");
    }

    #[test]
    fn identical_node_scores_maximum() {
        let kinds = FrequencyMap::from([("Block", 1), ("MethodDeclaration", 1)]);
        let v = SimilarityVector::compute(&kinds, &kinds, "m = a;", "m  =  a;", DEFAULT_NGRAM);
        for s in CombinationStrategy::ALL {
            assert_eq!(combine(&v, s), s.max_score(), "{s}");
        }
    }
}
