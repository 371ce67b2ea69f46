use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{NodeId, SourceTree};
use crate::grammar::GrammarDescriptor;

/// Multiset of node kinds. Stored counts are always positive.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyMap {
    entries: BTreeMap<String, u32>,
}

impl FrequencyMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, kind: &str, count: u32) {
        if count == 0 {
            return;
        }
        *self.entries.entry(kind.to_owned()).or_insert(0) += count;
    }

    pub fn get(&self, kind: &str) -> u32 {
        self.entries.get(kind).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entries.values().map(|&c| u64::from(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Multiset sum: counts of shared kinds are added.
    pub fn merged(&self, other: &FrequencyMap) -> FrequencyMap {
        let mut out = self.clone();
        for (kind, count) in other.iter() {
            out.add(kind, count);
        }
        out
    }
}

impl<'a> FromIterator<&'a str> for FrequencyMap {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut map = FrequencyMap::new();
        for kind in iter {
            map.add(kind, 1);
        }
        map
    }
}

impl<K: AsRef<str>, const N: usize> From<[(K, u32); N]> for FrequencyMap {
    fn from(pairs: [(K, u32); N]) -> Self {
        let mut map = FrequencyMap::new();
        for (k, v) in pairs {
            map.add(k.as_ref(), v);
        }
        map
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenealogyContext {
    pub owner: NodeId,
    pub ancestor_kinds: FrequencyMap,
    pub sibling_kinds: FrequencyMap,
}

/// Ancestors are collected bottom-up from the parent and stop at the first
/// method declaration (inclusive), or at the root when the node sits outside any
/// method. Siblings are the Statement/Expression nodes inside the nearest
/// enclosing block, excluding the owner's own subtree and its ancestors.
pub fn extract_genealogy(
    tree: &SourceTree,
    node: NodeId,
    grammar: &GrammarDescriptor,
) -> GenealogyContext {
    let owner = tree.node(node);
    let mut ancestor_kinds = FrequencyMap::new();
    if owner.kind != grammar.method_kind {
        for anc in tree.ancestors(node) {
            ancestor_kinds.add(&anc.kind, 1);
            if anc.kind == grammar.method_kind {
                break;
            }
        }
    }

    let mut sibling_kinds = FrequencyMap::new();
    let block = tree
        .ancestors(node)
        .take_while(|a| a.kind != grammar.method_kind)
        .find(|a| a.kind == grammar.block_kind);
    if let Some(block) = block {
        let excluded: std::collections::HashSet<NodeId> = tree.subtree(node).into_iter().collect();
        for id in tree.subtree(block.id).into_iter().skip(1) {
            let n = tree.node(id);
            if excluded.contains(&id) || tree.is_ancestor(id, node) {
                continue;
            }
            if n.category.is_statement_or_expression() {
                sibling_kinds.add(&n.kind, 1);
            }
        }
    }

    GenealogyContext {
        owner: node,
        ancestor_kinds,
        sibling_kinds,
    }
}

/// Ancestor and sibling kinds merged into one frequency table.
pub fn kind_frequencies(context: &GenealogyContext) -> FrequencyMap {
    context.ancestor_kinds.merged(&context.sibling_kinds)
}
