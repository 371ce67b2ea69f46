//! Insertion-based generate-and-validate program repair.
//!
//! The pipeline localizes suspicious AST nodes from test coverage, generates
//! insert-before / insert-after candidate patches from fixing ingredients found
//! in the same file, ranks the candidates by a contextual-similarity score and
//! validates them against the test suite in rank order.

pub mod ast;
pub mod error;
pub mod fault;
pub mod generation;
pub mod grammar;
pub mod harness;
pub mod prioritization;
pub mod similarity;
pub mod validation;

pub use error::{Error, ParseError, Result};
