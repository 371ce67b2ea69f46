//! Candidate patch generation.
//!
//! Each candidate inserts a copy of one fixing ingredient next to a faulty node.
//! The fix location is fixed at generation time as a child index in the anchor
//! (the node that receives the new child): either the faulty node's parent
//! (sibling insertion) or, for non-block container kinds, the faulty node
//! itself (child insertion).

mod antipattern;
mod apply;
mod whitelist;

use serde::{Deserialize, Serialize};

use crate::ast::{NodeId, SourceTree, Span};
use crate::grammar::GrammarDescriptor;

pub use antipattern::{anti_pattern_filter, FilterDecision, ANTI_APPEND_EARLY_EXIT};
pub use apply::{apply_patch, unified_diff, Variant};
pub use whitelist::{OperatorWhitelist, WhitelistEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Before,
    After,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InsertionMode {
    /// New sibling of the faulty node under its parent.
    Sibling,
    /// New child of the faulty node itself.
    Child,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MutationOperator {
    pub ingredient_kind: String,
    pub anchor_parent_kind: String,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub file: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePatch {
    /// Generation order; stable for identical inputs.
    pub id: usize,
    pub faulty_node: NodeId,
    pub ingredient: NodeId,
    pub operator: MutationOperator,
    pub mode: InsertionMode,
    /// Node that receives the inserted child.
    pub anchor: NodeId,
    /// Child index in `anchor` that the inserted subtree will occupy.
    pub fix_location: usize,
    pub provenance: Provenance,
}

/// Insertions of every ingredient around one faulty node. Returned ids start at
/// `first_id`. Pairs the whitelist does not allow produce nothing.
pub fn enumerate_insertions(
    tree: &SourceTree,
    faulty: NodeId,
    ingredients: &[NodeId],
    whitelist: &OperatorWhitelist,
    grammar: &GrammarDescriptor,
    file: &str,
    first_id: usize,
) -> Vec<CandidatePatch> {
    let node = tree.node(faulty);
    let mut out = Vec::new();

    // (mode, anchor, before-index, after-index)
    let mut slots = Vec::new();
    if let (Some(parent), Some(idx)) = (tree.parent(faulty), tree.child_index(faulty)) {
        if let Some(spec) = grammar.container(&parent.kind) {
            if idx >= spec.leading {
                slots.push((InsertionMode::Sibling, parent, idx, idx + 1));
            }
        }
    }
    if node.kind != grammar.block_kind {
        if let Some(spec) = grammar.container(&node.kind) {
            slots.push((InsertionMode::Child, node, spec.leading, node.children.len()));
        }
    }

    for &ing in ingredients {
        if ing == faulty {
            continue;
        }
        let ingredient = tree.node(ing);
        for &(mode, anchor, before, after) in &slots {
            for (position, fix_location) in [(Position::Before, before), (Position::After, after)] {
                if !whitelist.allows(&ingredient.kind, &anchor.kind, position) {
                    continue;
                }
                out.push(CandidatePatch {
                    id: first_id + out.len(),
                    faulty_node: faulty,
                    ingredient: ing,
                    operator: MutationOperator {
                        ingredient_kind: ingredient.kind.clone(),
                        anchor_parent_kind: anchor.kind.clone(),
                        position,
                    },
                    mode,
                    anchor: anchor.id,
                    fix_location,
                    provenance: Provenance {
                        file: file.to_owned(),
                        span: ingredient.span,
                    },
                });
            }
        }
    }
    out
}

/// Candidates for every faulty node, in faulty-node order.
pub fn enumerate_all(
    tree: &SourceTree,
    faulty_nodes: &[NodeId],
    ingredients: &[NodeId],
    whitelist: &OperatorWhitelist,
    grammar: &GrammarDescriptor,
    file: &str,
) -> Vec<CandidatePatch> {
    let mut out = Vec::new();
    for &f in faulty_nodes {
        let batch = enumerate_insertions(tree, f, ingredients, whitelist, grammar, file, out.len());
        out.extend(batch);
    }
    out
}
