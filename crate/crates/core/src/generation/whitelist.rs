use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Position;
use crate::error::{read_file, Error, Result};

const REFERENCE_TOML: &str = include_str!("../../data/whitelist.toml");

/// One augmented insertion operator: an ingredient kind inserted at a position
/// under a parent kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhitelistEntry {
    pub ingredient: String,
    pub parent: String,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorWhitelist {
    entries: BTreeSet<WhitelistEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WhitelistFile {
    entry: Vec<WhitelistEntry>,
}

impl OperatorWhitelist {
    pub fn new(entries: impl IntoIterator<Item = WhitelistEntry>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for e in entries {
            if !set.insert(e.clone()) {
                return Err(Error::Config(format!(
                    "duplicate whitelist entry {} under {} ({:?})",
                    e.ingredient, e.parent, e.position
                )));
            }
        }
        if set.is_empty() {
            return Err(Error::Config("operator whitelist is empty".into()));
        }
        Ok(Self { entries: set })
    }

    /// The ten-entry configuration shipped with the crate.
    pub fn reference() -> Self {
        Self::from_toml(REFERENCE_TOML).expect("bundled whitelist is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: WhitelistFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("whitelist: {e}")))?;
        Self::new(file.entry)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_file(path)?)
    }

    pub fn allows(&self, ingredient: &str, parent: &str, position: Position) -> bool {
        self.entries.contains(&WhitelistEntry {
            ingredient: ingredient.to_owned(),
            parent: parent.to_owned(),
            position,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &WhitelistEntry> {
        self.entries.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_has_ten_entries() {
        let w = OperatorWhitelist::reference();
        assert_eq!(w.len(), 10);
        assert!(w.allows("ExpressionStatement", "Block", Position::Before));
        assert!(w.allows("ReturnStatement", "Block", Position::After));
        assert!(!w.allows("WhileStatement", "Block", Position::After));
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        let e = WhitelistEntry {
            ingredient: "A".into(),
            parent: "B".into(),
            position: Position::After,
        };
        assert!(OperatorWhitelist::new([e.clone(), e]).is_err());
        assert!(OperatorWhitelist::new([]).is_err());
        assert!(OperatorWhitelist::from_toml("entry = []").is_err());
    }

    #[test]
    fn parses_user_file() {
        let w = OperatorWhitelist::from_toml(
            "[[entry]]\ningredient = \"SimpleName\"\nparent = \"MethodInvocation\"\nposition = \"before\"\n",
        )
        .unwrap();
        assert_eq!(w.len(), 1);
        assert!(w.allows("SimpleName", "MethodInvocation", Position::Before));
    }
}
