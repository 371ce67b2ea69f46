//! Pluggable grammars.
//!
//! A grammar couples a parser with a [`GrammarDescriptor`], the static data file
//! that names node kinds and assigns each kind a [`Category`]. Everything
//! downstream of parsing (localization, ingredient collection, genealogy,
//! insertion) reads kinds and categories through the descriptor only.

pub mod mini;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;

use crate::ast::{Category, SourceTree};
use crate::error::{Error, ParseError, Result};

/// How inserted children are laid out inside a container kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContainerStyle {
    /// One child per line, indented like its neighbours.
    Statements,
    /// Comma-separated list inside the node's closing delimiter.
    Arguments,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ContainerSpec {
    pub style: ContainerStyle,
    /// Number of leading children that are not list elements (a call's callee name).
    #[serde(default)]
    pub leading: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrammarDescriptor {
    pub id: String,
    pub root_kind: String,
    pub method_kind: String,
    pub block_kind: String,
    /// Production name -> node kind.
    pub productions: BTreeMap<String, String>,
    /// Node kind -> category.
    pub categories: BTreeMap<String, Category>,
    #[serde(default)]
    pub containers: BTreeMap<String, ContainerSpec>,
    #[serde(skip)]
    kind_to_production: BTreeMap<String, String>,
}

impl GrammarDescriptor {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut desc: GrammarDescriptor = toml::from_str(text)
            .map_err(|e| Error::Config(format!("grammar descriptor: {e}")))?;
        desc.kind_to_production = desc
            .productions
            .iter()
            .map(|(p, k)| (k.clone(), p.clone()))
            .collect();
        if desc.kind_to_production.len() != desc.productions.len() {
            return Err(Error::Config(
                "grammar descriptor maps two productions to the same kind".into(),
            ));
        }
        for kind in desc.productions.values() {
            if !desc.categories.contains_key(kind) {
                return Err(Error::Config(format!("kind {kind} has no category")));
            }
        }
        for kind in [&desc.root_kind, &desc.method_kind, &desc.block_kind]
            .into_iter()
            .chain(desc.containers.keys())
        {
            if !desc.kind_to_production.contains_key(kind) {
                return Err(Error::Config(format!("kind {kind} is not produced by any production")));
            }
        }
        Ok(desc)
    }

    /// Kind produced by `production`. Panics on a production the descriptor does
    /// not declare; parsers only ask for their own productions.
    pub fn kind(&self, production: &str) -> &str {
        self.productions
            .get(production)
            .unwrap_or_else(|| panic!("grammar descriptor {} lacks production {production}", self.id))
    }

    pub fn production_of(&self, kind: &str) -> Option<&str> {
        self.kind_to_production.get(kind).map(String::as_str)
    }

    pub fn category(&self, kind: &str) -> Category {
        self.categories.get(kind).copied().unwrap_or(Category::Other)
    }

    pub fn container(&self, kind: &str) -> Option<&ContainerSpec> {
        self.containers.get(kind)
    }

    pub fn kinds(&self) -> BTreeSet<&str> {
        self.categories.keys().map(String::as_str).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecLimits {
    pub timeout: Duration,
    /// Deterministic upper bound on evaluation steps; exceeding it counts as a timeout.
    pub max_steps: u64,
}

impl Default for ExecLimits {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(2),
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecStatus {
    Completed,
    RuntimeError(String),
    TimedOut,
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub stdout: String,
    pub status: ExecStatus,
    /// Start lines of every executed statement and evaluated expression.
    pub covered_lines: BTreeSet<u32>,
}

/// Runs a parsed program against one stdin payload.
pub trait Executor: Send + Sync {
    fn run(&self, tree: &SourceTree, stdin: &str, limits: &ExecLimits) -> Execution;
}

pub trait Grammar: Send + Sync {
    fn descriptor(&self) -> &GrammarDescriptor;

    fn id(&self) -> &str {
        &self.descriptor().id
    }

    fn parse(&self, source: &str) -> std::result::Result<SourceTree, ParseError>;

    /// Significant tokens of a fragment, with whitespace and comments dropped.
    fn tokens(&self, text: &str) -> std::result::Result<Vec<String>, ParseError>;

    /// Interpreter for the language, when one is bundled.
    fn executor(&self) -> Option<&dyn Executor>;
}

/// Looks up a built-in grammar by identifier.
pub fn grammar_for(id: &str) -> Result<Arc<dyn Grammar>> {
    match id {
        mini::GRAMMAR_ID => Ok(Arc::new(mini::MiniGrammar::new())),
        other => Err(Error::Config(format!("unknown grammar '{other}'"))),
    }
}

pub fn parse_source(source: &str, grammar_id: &str) -> Result<SourceTree> {
    let grammar = grammar_for(grammar_id)?;
    Ok(grammar.parse(source)?)
}
