//! Scoring and ranking of candidate patches.
//!
//! Similarity vectors do not depend on the strategy, so they are computed once
//! per candidate set and re-combined per strategy.

mod stats;

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ast::{extract_genealogy, kind_frequencies, FrequencyMap, NodeId, SourceTree};
use crate::generation::{CandidatePatch, InsertionMode, Position};
use crate::grammar::GrammarDescriptor;
use crate::similarity::{combine, CombinationStrategy, SimilarityVector};

pub use stats::{median, CellOutcome, ExperimentReport, ReportRow, StrategySummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPatch {
    pub candidate: CandidatePatch,
    pub vector: SimilarityVector,
    pub final_score: f64,
    /// Suspiciousness of the faulty node; only used to break ties.
    pub suspiciousness: f64,
    /// Byte offset of the ingredient in the source; only used to break ties.
    pub ingredient_offset: usize,
    /// 1-based; 0 until `rank` assigns it.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedPatchList {
    pub strategy: CombinationStrategy,
    pub patches: Vec<ScoredPatch>,
    pub total: usize,
}

/// Similarity vectors for every candidate, in candidate order. Genealogy is
/// extracted once per distinct node.
pub fn compute_vectors(
    candidates: &[CandidatePatch],
    tree: &SourceTree,
    grammar: &GrammarDescriptor,
    ngram: usize,
) -> Vec<SimilarityVector> {
    let mut nodes: Vec<NodeId> = candidates
        .iter()
        .flat_map(|c| [c.faulty_node, c.ingredient])
        .collect();
    nodes.sort();
    nodes.dedup();
    let kinds: HashMap<NodeId, FrequencyMap> = nodes
        .par_iter()
        .map(|&n| (n, kind_frequencies(&extract_genealogy(tree, n, grammar))))
        .collect();
    candidates
        .par_iter()
        .map(|c| {
            SimilarityVector::compute(
                &kinds[&c.faulty_node],
                &kinds[&c.ingredient],
                &tree.node(c.faulty_node).text,
                &tree.node(c.ingredient).text,
                ngram,
            )
        })
        .collect()
}

/// Combines precomputed vectors under `strategy`. `suspiciousness` maps faulty
/// nodes to their localization score; missing nodes count as 0.
pub fn score_with_vectors(
    candidates: &[CandidatePatch],
    vectors: &[SimilarityVector],
    strategy: CombinationStrategy,
    tree: &SourceTree,
    suspiciousness: &HashMap<NodeId, f64>,
) -> Vec<ScoredPatch> {
    assert_eq!(candidates.len(), vectors.len());
    candidates
        .iter()
        .zip(vectors)
        .map(|(c, v)| ScoredPatch {
            candidate: c.clone(),
            vector: *v,
            final_score: combine(v, strategy),
            suspiciousness: suspiciousness.get(&c.faulty_node).copied().unwrap_or(0.0),
            ingredient_offset: tree.node(c.ingredient).span.start_byte,
            rank: 0,
        })
        .collect()
}

pub fn score_patches(
    candidates: &[CandidatePatch],
    strategy: CombinationStrategy,
    tree: &SourceTree,
    grammar: &GrammarDescriptor,
    suspiciousness: &HashMap<NodeId, f64>,
    ngram: usize,
) -> Vec<ScoredPatch> {
    let vectors = compute_vectors(candidates, tree, grammar, ngram);
    score_with_vectors(candidates, &vectors, strategy, tree, suspiciousness)
}

/// Descending score; ties go to the more suspicious faulty node, then the
/// earlier ingredient, then generation order.
pub fn rank(mut scored: Vec<ScoredPatch>, strategy: CombinationStrategy) -> RankedPatchList {
    scored.sort_by(|a, b| {
        b.final_score
            .total_cmp(&a.final_score)
            .then_with(|| b.suspiciousness.total_cmp(&a.suspiciousness))
            .then_with(|| a.ingredient_offset.cmp(&b.ingredient_offset))
            .then_with(|| a.candidate.id.cmp(&b.candidate.id))
    });
    for (i, p) in scored.iter_mut().enumerate() {
        p.rank = i + 1;
    }
    RankedPatchList {
        strategy,
        total: scored.len(),
        patches: scored,
    }
}

#[derive(Serialize)]
struct RankedRecord<'a> {
    rank: usize,
    candidate: usize,
    strategy: CombinationStrategy,
    final_score: f64,
    gen_s: f64,
    n_lcs: f64,
    cos_s: f64,
    n_ed: f64,
    jac_s: f64,
    suspiciousness: f64,
    faulty_node: NodeId,
    ingredient: NodeId,
    ingredient_kind: &'a str,
    anchor_kind: &'a str,
    position: Position,
    mode: InsertionMode,
    anchor: NodeId,
    fix_location: usize,
}

impl RankedPatchList {
    /// One JSON object per line, in rank order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for p in &self.patches {
            let c = &p.candidate;
            let record = RankedRecord {
                rank: p.rank,
                candidate: c.id,
                strategy: self.strategy,
                final_score: p.final_score,
                gen_s: p.vector.gen_s,
                n_lcs: p.vector.n_lcs,
                cos_s: p.vector.cos_s,
                n_ed: p.vector.n_ed,
                jac_s: p.vector.jac_s,
                suspiciousness: p.suspiciousness,
                faulty_node: c.faulty_node,
                ingredient: c.ingredient,
                ingredient_kind: &c.operator.ingredient_kind,
                anchor_kind: &c.operator.anchor_parent_kind,
                position: c.operator.position,
                mode: c.mode,
                anchor: c.anchor,
                fix_location: c.fix_location,
            };
            out.push_str(&serde_json::to_string(&record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// Fixed-width listing of the ranked candidates.
    pub fn to_table(&self, tree: &SourceTree) -> String {
        let mut out = format!("strategy {} ({} patches)\n", self.strategy.label(), self.total);
        let _ = writeln!(
            out,
            "{:>5} {:>5} {:>7} {:>6} {:>6} {:>6} {:>6} {:>6}  {:<6} ingredient",
            "rank", "id", "score", "gen", "lcs", "cos", "ned", "jac", "pos"
        );
        for p in &self.patches {
            let v = &p.vector;
            let text = crate::similarity::normalize_whitespace(&tree.node(p.candidate.ingredient).text);
            let _ = writeln!(
                out,
                "{:>5} {:>5} {:>7.4} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>6.3}  {:<6} {}",
                p.rank,
                p.candidate.id,
                p.final_score,
                v.gen_s,
                v.n_lcs,
                v.cos_s,
                v.n_ed,
                v.jac_s,
                match p.candidate.operator.position {
                    Position::Before => "before",
                    Position::After => "after",
                },
                text
            );
        }
        out
    }
}
