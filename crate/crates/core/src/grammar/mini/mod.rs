//! Reference imperative mini-language: typed functions over int, float, string
//! and bool scalars with if/else, while, return, assignment, calls, comparisons
//! and arithmetic.
//!
//! ```text
//! int max(int a, int b) {
//!     if (a > b) { return a; }
//!     return b;
//! }
//! void main() {
//!     print(max(read_int(), read_int()));
//! }
//! ```

mod interp;
mod lexer;
mod parser;

use std::sync::OnceLock;

use super::{ExecLimits, Execution, Executor, Grammar, GrammarDescriptor};
use crate::ast::SourceTree;
use crate::error::ParseError;

pub const GRAMMAR_ID: &str = "mini";

const DESCRIPTOR_TOML: &str = include_str!("../../../data/mini.grammar.toml");

/// The descriptor shipped with the crate.
pub fn reference_descriptor() -> &'static GrammarDescriptor {
    static DESC: OnceLock<GrammarDescriptor> = OnceLock::new();
    DESC.get_or_init(|| {
        GrammarDescriptor::from_toml(DESCRIPTOR_TOML).expect("bundled grammar descriptor is valid")
    })
}

#[derive(Debug, Clone)]
pub struct MiniGrammar {
    descriptor: GrammarDescriptor,
}

impl Default for MiniGrammar {
    fn default() -> Self {
        Self::new()
    }
}

impl MiniGrammar {
    pub fn new() -> Self {
        Self {
            descriptor: reference_descriptor().clone(),
        }
    }

    /// Same parser and interpreter under a caller-supplied descriptor, e.g. one
    /// with renamed kinds or a different category assignment.
    pub fn with_descriptor(descriptor: GrammarDescriptor) -> Self {
        Self { descriptor }
    }
}

impl Grammar for MiniGrammar {
    fn descriptor(&self) -> &GrammarDescriptor {
        &self.descriptor
    }

    fn parse(&self, source: &str) -> Result<SourceTree, ParseError> {
        parser::parse(source, &self.descriptor)
    }

    fn tokens(&self, text: &str) -> Result<Vec<String>, ParseError> {
        Ok(lexer::tokenize(text)?
            .into_iter()
            .map(|t| text[t.start..t.end].to_owned())
            .collect())
    }

    fn executor(&self) -> Option<&dyn Executor> {
        Some(self)
    }
}

impl Executor for MiniGrammar {
    fn run(&self, tree: &SourceTree, stdin: &str, limits: &ExecLimits) -> Execution {
        interp::run(tree, &self.descriptor, stdin, limits)
    }
}
