use super::CandidatePatch;
use crate::ast::SourceTree;
use crate::grammar::GrammarDescriptor;

pub const ANTI_APPEND_EARLY_EXIT: &str = "anti-append-early-exit";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterDecision {
    Keep,
    Reject(&'static str),
}

/// Anti-append-early-exit: a return statement may only be inserted after the
/// last statement of its block. Every other insertion is kept.
pub fn anti_pattern_filter(
    patch: &CandidatePatch,
    tree: &SourceTree,
    grammar: &GrammarDescriptor,
) -> FilterDecision {
    if patch.operator.ingredient_kind != grammar.kind("return") {
        return FilterDecision::Keep;
    }
    let anchor = tree.node(patch.anchor);
    if anchor.kind == grammar.block_kind && patch.fix_location == anchor.children.len() {
        FilterDecision::Keep
    } else {
        FilterDecision::Reject(ANTI_APPEND_EARLY_EXIT)
    }
}
