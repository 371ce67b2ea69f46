use similar::TextDiff;

use super::CandidatePatch;
use crate::ast::{AstNode, SourceTree};
use crate::error::{Error, Result};
use crate::grammar::{ContainerStyle, Grammar};

/// A patched program: the original source with one inserted fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub source: String,
    /// Byte offset in the original source where `inserted` begins.
    pub offset: usize,
    /// Inserted text, including any separator and indentation.
    pub inserted: String,
}

impl Variant {
    /// Removes the inserted fragment again.
    pub fn revert(&self) -> String {
        let mut out = self.source.clone();
        out.replace_range(self.offset..self.offset + self.inserted.len(), "");
        out
    }
}

fn line_start(source: &str, byte: usize) -> usize {
    source[..byte].rfind('\n').map_or(0, |i| i + 1)
}

/// Leading whitespace of the line holding `node`, and whether the node is the
/// first thing on that line.
fn indentation<'s>(source: &'s str, node: &AstNode) -> (&'s str, bool) {
    let start = line_start(source, node.span.start_byte);
    let prefix = &source[start..node.span.start_byte];
    let indent_len = prefix.len() - prefix.trim_start().len();
    (&prefix[..indent_len], prefix.trim().is_empty())
}

/// Ingredient text with continuation lines re-based from the ingredient's own
/// indentation onto `indent`.
fn reindent(source: &str, ingredient: &AstNode, indent: &str) -> String {
    let (own, _) = indentation(source, ingredient);
    let mut lines = ingredient.text.split('\n');
    let mut out = lines.next().unwrap_or("").to_owned();
    for line in lines {
        out.push('\n');
        let rest = line.strip_prefix(own).unwrap_or_else(|| line.trim_start());
        if !rest.is_empty() {
            out.push_str(indent);
        }
        out.push_str(rest);
    }
    out
}

/// Inserts the candidate's ingredient at its fix location and reparses.
///
/// Only the insertion point changes: the output is the original source with
/// one fragment (the ingredient text plus separator and indentation) spliced in.
pub fn apply_patch(tree: &SourceTree, patch: &CandidatePatch, grammar: &dyn Grammar) -> Result<Variant> {
    let source = tree.source.as_str();
    let desc = grammar.descriptor();
    let anchor = tree.node(patch.anchor);
    let ingredient = tree.node(patch.ingredient);
    let spec = desc.container(&anchor.kind).ok_or_else(|| {
        Error::InvalidMutation(format!("{} does not accept inserted children", anchor.kind))
    })?;
    let children: Vec<&AstNode> = anchor.children.iter().map(|&c| tree.node(c)).collect();
    if patch.fix_location < spec.leading || patch.fix_location > children.len() {
        return Err(Error::InvalidMutation(format!(
            "fix location {} outside {}..={} of {}",
            patch.fix_location,
            spec.leading,
            children.len(),
            anchor.id
        )));
    }

    let (offset, inserted) = match spec.style {
        ContainerStyle::Statements => {
            if let Some(next) = children.get(patch.fix_location) {
                let (indent, own_line) = indentation(source, next);
                let body = reindent(source, ingredient, indent);
                if own_line {
                    (line_start(source, next.span.start_byte), format!("{indent}{body}\n"))
                } else {
                    (next.span.start_byte, format!("{body} "))
                }
            } else if let Some(prev) = children.last() {
                let (indent, _) = indentation(source, prev);
                let body = reindent(source, ingredient, indent);
                (prev.span.end_byte, format!("\n{indent}{body}"))
            } else {
                // Empty block: right after the opening delimiter.
                let body = reindent(source, ingredient, "");
                (anchor.span.start_byte + 1, format!(" {body} "))
            }
        }
        ContainerStyle::Arguments => {
            let text = crate::similarity::normalize_whitespace(&ingredient.text);
            if let Some(next) = children.get(patch.fix_location) {
                (next.span.start_byte, format!("{text}, "))
            } else if children.len() > spec.leading {
                (children[children.len() - 1].span.end_byte, format!(", {text}"))
            } else {
                // No arguments yet: just before the closing delimiter.
                (anchor.span.end_byte - 1, text)
            }
        }
    };

    let mut variant = String::with_capacity(source.len() + inserted.len());
    variant.push_str(&source[..offset]);
    variant.push_str(&inserted);
    variant.push_str(&source[offset..]);
    grammar
        .parse(&variant)
        .map_err(|e| Error::InvalidMutation(format!("candidate {}: {e}", patch.id)))?;
    Ok(Variant {
        source: variant,
        offset,
        inserted,
    })
}

/// Unified diff between two versions of a file.
pub fn unified_diff(original: &str, patched: &str, label: &str) -> String {
    TextDiff::from_lines(original, patched)
        .unified_diff()
        .context_radius(3)
        .header(&format!("a/{label}"), &format!("b/{label}"))
        .to_string()
}
