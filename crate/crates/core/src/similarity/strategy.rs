use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimilarityVector;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Genealogical,
    Lcs,
    Cosine,
    EditDistance,
    Jaccard,
}

/// How the five similarity components are turned into one patch score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CombinationStrategy {
    /// genealogical + LCS + cosine
    #[serde(rename = "com-cs")]
    ComCs,
    /// genealogical + LCS + edit distance
    #[serde(rename = "com-ned")]
    ComNed,
    /// genealogical + LCS + Jaccard
    #[serde(rename = "com-js")]
    ComJs,
    /// genealogical similarity alone
    #[serde(rename = "ssba")]
    Ssba,
    /// normalized LCS alone
    #[serde(rename = "lba")]
    Lba,
    /// cosine alone
    #[serde(rename = "csba")]
    Csba,
    /// Jaccard alone
    #[serde(rename = "jsba")]
    Jsba,
    /// normalized edit distance alone
    #[serde(rename = "nba")]
    Nba,
}

impl CombinationStrategy {
    pub const ALL: [CombinationStrategy; 8] = [
        CombinationStrategy::ComCs,
        CombinationStrategy::ComNed,
        CombinationStrategy::ComJs,
        CombinationStrategy::Ssba,
        CombinationStrategy::Lba,
        CombinationStrategy::Csba,
        CombinationStrategy::Jsba,
        CombinationStrategy::Nba,
    ];

    pub const COMBINED: [CombinationStrategy; 3] = [
        CombinationStrategy::ComCs,
        CombinationStrategy::ComNed,
        CombinationStrategy::ComJs,
    ];

    /// Canonical identifier accepted by configuration files and the CLI.
    pub fn id(self) -> &'static str {
        match self {
            CombinationStrategy::ComCs => "com-cs",
            CombinationStrategy::ComNed => "com-ned",
            CombinationStrategy::ComJs => "com-js",
            CombinationStrategy::Ssba => "ssba",
            CombinationStrategy::Lba => "lba",
            CombinationStrategy::Csba => "csba",
            CombinationStrategy::Jsba => "jsba",
            CombinationStrategy::Nba => "nba",
        }
    }

    /// Display label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            CombinationStrategy::ComCs => "Com-CS",
            CombinationStrategy::ComNed => "Com-NED",
            CombinationStrategy::ComJs => "Com-JS",
            CombinationStrategy::Ssba => "SSBA",
            CombinationStrategy::Lba => "LBA",
            CombinationStrategy::Csba => "CSBA",
            CombinationStrategy::Jsba => "JSBA",
            CombinationStrategy::Nba => "NBA",
        }
    }

    pub fn components(self) -> &'static [Metric] {
        use Metric::*;
        match self {
            CombinationStrategy::ComCs => &[Genealogical, Lcs, Cosine],
            CombinationStrategy::ComNed => &[Genealogical, Lcs, EditDistance],
            CombinationStrategy::ComJs => &[Genealogical, Lcs, Jaccard],
            CombinationStrategy::Ssba => &[Genealogical],
            CombinationStrategy::Lba => &[Lcs],
            CombinationStrategy::Csba => &[Cosine],
            CombinationStrategy::Jsba => &[Jaccard],
            CombinationStrategy::Nba => &[EditDistance],
        }
    }

    pub fn is_combined(self) -> bool {
        self.components().len() > 1
    }

    /// Largest score the strategy can produce.
    pub fn max_score(self) -> f64 {
        self.components().len() as f64
    }
}

impl fmt::Display for CombinationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for CombinationStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        CombinationStrategy::ALL
            .into_iter()
            .find(|st| st.id() == lower)
            .ok_or_else(|| {
                let known: Vec<_> = CombinationStrategy::ALL.iter().map(|s| s.id()).collect();
                Error::Config(format!("unknown strategy '{s}' (expected one of {})", known.join(", ")))
            })
    }
}

/// Sum of the strategy's active components.
pub fn combine(v: &SimilarityVector, strategy: CombinationStrategy) -> f64 {
    strategy.components().iter().map(|&m| v.get(m)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vector(gen_s: f64, n_lcs: f64, cos_s: f64) -> SimilarityVector {
        SimilarityVector {
            gen_s,
            n_lcs,
            cos_s,
            n_ed: 0.9,
            jac_s: 0.1,
        }
    }

    #[test]
    fn pinned_values() {
        let ones = SimilarityVector {
            gen_s: 1.0,
            n_lcs: 1.0,
            cos_s: 1.0,
            n_ed: 1.0,
            jac_s: 1.0,
        };
        assert_eq!(combine(&ones, CombinationStrategy::ComCs), 3.0);
        let v = vector(0.5, 0.4, 0.3);
        assert!((combine(&v, CombinationStrategy::ComCs) - 1.2).abs() < 1e-15);
        assert_eq!(combine(&v, CombinationStrategy::Csba), 0.3);
        assert_eq!(combine(&v, CombinationStrategy::Ssba), 0.5);
        assert_eq!(combine(&v, CombinationStrategy::Lba), 0.4);
        assert_eq!(combine(&v, CombinationStrategy::Nba), 0.9);
        assert_eq!(combine(&v, CombinationStrategy::Jsba), 0.1);
    }

    #[test]
    fn combined_strategies_share_the_fixed_pair() {
        for s in CombinationStrategy::COMBINED {
            assert_eq!(&s.components()[..2], &[Metric::Genealogical, Metric::Lcs]);
            assert_eq!(s.max_score(), 3.0);
        }
        for s in &CombinationStrategy::ALL[3..] {
            assert_eq!(s.components().len(), 1);
        }
    }

    #[test]
    fn canonical_ids_round_trip() {
        for s in CombinationStrategy::ALL {
            assert_eq!(s.id().parse::<CombinationStrategy>().unwrap(), s);
        }
        assert_eq!("Com-CS".parse::<CombinationStrategy>().unwrap(), CombinationStrategy::ComCs);
        assert!(matches!("tfidf".parse::<CombinationStrategy>(), Err(Error::Config(_))));
    }
}
