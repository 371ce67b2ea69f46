//! Language-agnostic typed syntax tree.
//!
//! A [`SourceTree`] is an arena of [`AstNode`]s addressed by [`NodeId`]. Ids are
//! assigned in preorder, so iterating the arena visits nodes in source order with
//! parents before their children. Every node keeps the exact source slice it
//! covers; the root covers the entire input, so `root.text` reproduces the source
//! byte for byte.

mod genealogy;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use genealogy::{extract_genealogy, kind_frequencies, FrequencyMap, GenealogyContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Coarse classification of node kinds, declared per kind in the grammar descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Statement,
    /// Statement-level code whose payload is expression-level (`x = y;`, `return e;`).
    ExpressionStatement,
    Expression,
    Other,
}

impl Category {
    /// Kinds that serve as fixing ingredients and as faulty-node candidates.
    pub fn is_ingredient(self) -> bool {
        matches!(self, Category::Expression | Category::ExpressionStatement)
    }

    /// Kinds counted as siblings in a genealogy context.
    pub fn is_statement_or_expression(self) -> bool {
        !matches!(self, Category::Other)
    }
}

/// Source region. Lines and columns are 1-based; `end_col` is exclusive.
/// Byte offsets address the same region in the tree's source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
    pub start_byte: usize,
    pub end_byte: usize,
}

impl Span {
    pub fn contains(&self, other: &Span) -> bool {
        self.start_byte <= other.start_byte && other.end_byte <= self.end_byte
    }

    pub fn lines(&self) -> std::ops::RangeInclusive<u32> {
        self.start_line..=self.end_line
    }

    pub fn is_single_line(&self) -> bool {
        self.start_line == self.end_line
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AstNode {
    pub id: NodeId,
    pub kind: String,
    pub category: Category,
    pub span: Span,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceTree {
    pub root: NodeId,
    pub nodes: Vec<AstNode>,
    pub source: String,
    pub grammar_id: String,
}

impl SourceTree {
    /// Panics if `id` does not belong to this tree.
    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id.0]
    }

    pub fn get(&self, id: NodeId) -> Option<&AstNode> {
        self.nodes.get(id.0)
    }

    pub fn root_node(&self) -> &AstNode {
        self.node(self.root)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All nodes in preorder (source order).
    pub fn iter(&self) -> impl Iterator<Item = &AstNode> {
        self.nodes.iter()
    }

    pub fn parent(&self, id: NodeId) -> Option<&AstNode> {
        self.node(id).parent.map(|p| self.node(p))
    }

    /// Strict ancestors, nearest first.
    pub fn ancestors(&self, id: NodeId) -> Ancestors<'_> {
        Ancestors {
            tree: self,
            next: self.node(id).parent,
        }
    }

    pub fn is_ancestor(&self, ancestor: NodeId, of: NodeId) -> bool {
        self.ancestors(of).any(|n| n.id == ancestor)
    }

    /// `node` itself and every node below it, in preorder.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.node(n).children.iter().rev().copied());
        }
        out
    }

    pub fn subtree_size(&self, id: NodeId) -> usize {
        self.subtree(id).len()
    }

    /// Position of `id` among its parent's children.
    pub fn child_index(&self, id: NodeId) -> Option<usize> {
        let parent = self.parent(id)?;
        parent.children.iter().position(|c| *c == id)
    }

    pub fn enclosing_kind(&self, id: NodeId, kind: &str) -> Option<&AstNode> {
        self.ancestors(id).find(|n| n.kind == kind)
    }
}

pub struct Ancestors<'a> {
    tree: &'a SourceTree,
    next: Option<NodeId>,
}

impl<'a> Iterator for Ancestors<'a> {
    type Item = &'a AstNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.tree.node(self.next?);
        self.next = node.parent;
        Some(node)
    }
}

/// Every Expression and Expression-Statement node of the tree, in source order.
/// Identity is by node: textually equal expressions are distinct ingredients.
pub fn collect_ingredients(tree: &SourceTree) -> Vec<NodeId> {
    tree.iter()
        .filter(|n| n.category.is_ingredient())
        .map(|n| n.id)
        .collect()
}

/// Lines holding the start of at least one executable node: any Statement or
/// Expression category node other than a bare block.
pub fn executable_lines(tree: &SourceTree, block_kind: &str) -> std::collections::BTreeSet<u32> {
    tree.iter()
        .filter(|n| n.category.is_statement_or_expression() && n.kind != block_kind)
        .map(|n| n.span.start_line)
        .collect()
}

/// Checks the structural invariants of a tree. Used by tests and by the
/// grammar layer after parsing.
pub fn check_invariants(tree: &SourceTree) -> std::result::Result<(), String> {
    let root = tree.get(tree.root).ok_or("root id out of range")?;
    if root.parent.is_some() {
        return Err("root has a parent".into());
    }
    for (i, node) in tree.nodes.iter().enumerate() {
        if node.id.0 != i {
            return Err(format!("node at index {i} carries id {}", node.id));
        }
        if tree.source.get(node.span.start_byte..node.span.end_byte) != Some(node.text.as_str()) {
            return Err(format!("{} text does not match its span", node.id));
        }
        if node.id != tree.root && node.parent.is_none() {
            return Err(format!("{} has no parent", node.id));
        }
        let mut prev_end = node.span.start_byte;
        for &c in &node.children {
            let child = tree.get(c).ok_or_else(|| format!("dangling child {c}"))?;
            if child.parent != Some(node.id) {
                return Err(format!("{c} does not point back to parent {}", node.id));
            }
            if !node.span.contains(&child.span) {
                return Err(format!("{c} escapes parent {}", node.id));
            }
            if child.span.start_byte < prev_end {
                return Err(format!("{c} overlaps its previous sibling"));
            }
            prev_end = child.span.end_byte;
        }
    }
    let reachable = tree.subtree(tree.root).len();
    if reachable != tree.len() {
        return Err(format!("{} nodes unreachable from root", tree.len() - reachable));
    }
    Ok(())
}
