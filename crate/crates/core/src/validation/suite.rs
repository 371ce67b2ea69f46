use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{read_file, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Passes on the original program.
    Positive,
    /// Fails on the original program.
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub id: String,
    pub polarity: Polarity,
    pub input: String,
    pub expected: String,
    pub timeout: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSuite {
    cases: Vec<TestCase>,
}

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(2);

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestCase {
    id: String,
    polarity: Polarity,
    input: String,
    expected: String,
    timeout_ms: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    timeout_ms: Option<u64>,
    test: Vec<ManifestCase>,
}

impl TestSuite {
    /// Requires unique ids and at least one negative case.
    pub fn new(cases: Vec<TestCase>) -> Result<Self> {
        let mut ids = std::collections::HashSet::new();
        for c in &cases {
            if !ids.insert(c.id.as_str()) {
                return Err(Error::Suite(format!("duplicate test id {}", c.id)));
            }
        }
        if !cases.iter().any(|c| c.polarity == Polarity::Negative) {
            return Err(Error::Suite("no negative test case".into()));
        }
        Ok(Self { cases })
    }

    /// Reads a TOML manifest; input and expected-output paths are relative to
    /// the manifest's directory.
    ///
    /// ```toml
    /// timeout_ms = 2000
    /// [[test]]
    /// id = "n1"
    /// polarity = "negative"
    /// input = "tests/n1.in"
    /// expected = "tests/n1.out"
    /// ```
    pub fn load(manifest: &Path) -> Result<Self> {
        let text = read_file(manifest)?;
        let m: Manifest =
            toml::from_str(&text).map_err(|e| Error::Suite(format!("{}: {e}", manifest.display())))?;
        let dir = manifest.parent().unwrap_or(Path::new("."));
        let default = m.timeout_ms.map_or(DEFAULT_TIMEOUT, Duration::from_millis);
        let cases = m
            .test
            .into_iter()
            .map(|c| {
                Ok(TestCase {
                    input: read_file(&dir.join(&c.input))?,
                    expected: read_file(&dir.join(&c.expected))?,
                    timeout: c.timeout_ms.map_or(default, Duration::from_millis),
                    id: c.id,
                    polarity: c.polarity,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cases)
    }

    pub fn cases(&self) -> &[TestCase] {
        &self.cases
    }

    /// Negative cases first, each group in manifest order. Failing tests are
    /// the likeliest to stop a run early.
    pub fn execution_order(&self) -> impl Iterator<Item = &TestCase> {
        let neg = self.cases.iter().filter(|c| c.polarity == Polarity::Negative);
        neg.chain(self.cases.iter().filter(|c| c.polarity == Polarity::Positive))
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        for c in &mut self.cases {
            c.timeout = timeout;
        }
        self
    }
}

/// Trailing whitespace on each line and trailing blank lines are ignored;
/// `\r\n` counts as `\n`.
pub fn normalize_output(text: &str) -> String {
    let mut lines: Vec<&str> = text.split('\n').map(|l| l.trim_end()).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines.join("\n")
}

pub fn outputs_match(actual: &str, expected: &str) -> bool {
    normalize_output(actual) == normalize_output(expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(id: &str, polarity: Polarity) -> TestCase {
        TestCase {
            id: id.into(),
            polarity,
            input: String::new(),
            expected: String::new(),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    #[test]
    fn output_normalization() {
        assert!(outputs_match("1 2  \r\n3\n\n\n", "1 2\n3"));
        assert!(!outputs_match(" 1\n", "1\n"));
        assert!(!outputs_match("1\n\n2", "1\n2"));
    }

    #[test]
    fn suite_needs_a_negative_case() {
        assert!(TestSuite::new(vec![case("p", Polarity::Positive)]).is_err());
        assert!(TestSuite::new(vec![case("n", Polarity::Negative), case("n", Polarity::Positive)]).is_err());
        let s = TestSuite::new(vec![case("p", Polarity::Positive), case("n", Polarity::Negative)]).unwrap();
        let order: Vec<&str> = s.execution_order().map(|c| c.id.as_str()).collect();
        assert_eq!(order, ["n", "p"]);
    }

    #[test]
    fn loads_manifest() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.in"), "3\n").unwrap();
        std::fs::write(dir.path().join("a.out"), "6\n").unwrap();
        std::fs::write(
            dir.path().join("tests.toml"),
            "timeout_ms = 500\n[[test]]\nid = \"a\"\npolarity = \"negative\"\ninput = \"a.in\"\nexpected = \"a.out\"\n",
        )
        .unwrap();
        let s = TestSuite::load(&dir.path().join("tests.toml")).unwrap();
        assert_eq!(s.cases()[0].input, "3\n");
        assert_eq!(s.cases()[0].timeout, Duration::from_millis(500));
        std::fs::write(dir.path().join("bad.toml"), "[[test]]\nid = \"a\"\n").unwrap();
        assert!(matches!(TestSuite::load(&dir.path().join("bad.toml")), Err(Error::Suite(_))));
    }
}
