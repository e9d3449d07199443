//! Antenna configurations, user relabeling and the case taxonomy.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("antenna count {name} must be at least 1 (got {value})")]
    NonPositive { name: &'static str, value: i64 },
    #[error("no case applies to configuration {0}")]
    Uncovered(AntennaConfig),
    #[error("{case} does not apply to configuration {cfg}")]
    InapplicableCase { case: CaseLabel, cfg: AntennaConfig },
}

/// Antenna counts of the two transmitter/receiver pairs.
///
/// After [`canonicalize`] the pair with the larger `max{m, n}` is user 1;
/// `swapped` records whether the caller's user indices were exchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub m1: usize,
    pub m2: usize,
    pub n1: usize,
    pub n2: usize,
    pub swapped: bool,
}

impl AntennaConfig {
    /// Builds a configuration without relabeling. Counts must be positive.
    pub fn new(m1: usize, m2: usize, n1: usize, n2: usize) -> Result<Self, ModelError> {
        for (name, value) in [("m1", m1), ("m2", m2), ("n1", n1), ("n2", n2)] {
            if value == 0 {
                return Err(ModelError::NonPositive { name, value: 0 });
            }
        }
        Ok(AntennaConfig { m1, m2, n1, n2, swapped: false })
    }

    pub fn symmetric(m: usize, n: usize) -> Result<Self, ModelError> {
        Self::new(m, m, n, n)
    }

    pub fn is_canonical(&self) -> bool {
        self.m1.max(self.n1) >= self.m2.max(self.n2)
    }

    /// The same channel with user indices exchanged.
    pub fn relabeled(&self) -> Self {
        AntennaConfig {
            m1: self.m2,
            m2: self.m1,
            n1: self.n2,
            n2: self.n1,
            swapped: !self.swapped,
        }
    }

    pub fn counts(&self) -> (usize, usize, usize, usize) {
        (self.m1, self.m2, self.n1, self.n2)
    }
}

impl fmt::Display for AntennaConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(M1={}, M2={}, N1={}, N2={})", self.m1, self.m2, self.n1, self.n2)
    }
}

/// Number of reflecting elements; zero means no RIS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RisConfig {
    pub r: usize,
}

impl RisConfig {
    pub fn new(r: usize) -> Self {
        RisConfig { r }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseLabel {
    Case1,
    Case2_1,
    Case2_2,
    Case3,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 4] = [
        CaseLabel::Case1,
        CaseLabel::Case2_1,
        CaseLabel::Case2_2,
        CaseLabel::Case3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CaseLabel::Case1 => "Case1",
            CaseLabel::Case2_1 => "Case2_1",
            CaseLabel::Case2_2 => "Case2_2",
            CaseLabel::Case3 => "Case3",
        }
    }

    /// Whether the row conditions of this case hold for `cfg`.
    pub fn applies(&self, cfg: &AntennaConfig) -> bool {
        let (m1, m2, n1, n2) = cfg.counts();
        match self {
            CaseLabel::Case1 => m1 >= m2 && m1 >= n1 && m1 >= n2 && m2 >= n1,
            CaseLabel::Case2_1 => m1 >= n2 && n1 >= m2 && m1 >= n1,
            CaseLabel::Case2_2 => m1 >= n2 && n1 >= m2 && n1 > m1,
            CaseLabel::Case3 => n1 >= m1 && n1 >= m2 && n1 >= n2 && n2 >= m1,
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CaseLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match key.to_ascii_lowercase().as_str() {
            "case1" | "1" => Ok(CaseLabel::Case1),
            "case21" | "21" => Ok(CaseLabel::Case2_1),
            "case22" | "22" => Ok(CaseLabel::Case2_2),
            "case3" | "3" => Ok(CaseLabel::Case3),
            _ => Err(format!("unknown case label '{s}'")),
        }
    }
}

/// Validates raw counts and relabels users so that
/// `max{m1, n1} >= max{m2, n2}`.
pub fn canonicalize(m1: i64, m2: i64, n1: i64, n2: i64) -> Result<AntennaConfig, ModelError> {
    for (name, value) in [("m1", m1), ("m2", m2), ("n1", n1), ("n2", n2)] {
        if value < 1 {
            return Err(ModelError::NonPositive { name, value });
        }
    }
    let cfg = AntennaConfig::new(m1 as usize, m2 as usize, n1 as usize, n2 as usize)?;
    Ok(canonical(cfg))
}

/// Relabels an already validated configuration. Idempotent.
pub fn canonical(cfg: AntennaConfig) -> AntennaConfig {
    if cfg.is_canonical() {
        cfg
    } else {
        cfg.relabeled()
    }
}

/// Every case label whose conditions hold, in declaration order.
pub fn classify_cases(cfg: &AntennaConfig) -> Result<Vec<CaseLabel>, ModelError> {
    let cases: Vec<CaseLabel> = CaseLabel::ALL.iter().copied().filter(|c| c.applies(cfg)).collect();
    if cases.is_empty() {
        return Err(ModelError::Uncovered(*cfg));
    }
    Ok(cases)
}

pub(crate) fn ensure_applies(cfg: &AntennaConfig, case: CaseLabel) -> Result<(), ModelError> {
    if case.applies(cfg) {
        Ok(())
    } else {
        Err(ModelError::InapplicableCase { case, cfg: *cfg })
    }
}
