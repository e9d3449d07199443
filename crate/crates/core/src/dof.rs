//! Closed-form achievable sum-DoF with an active RIS.
//!
//! Every quantity here is an exact integer. Floors of the balancing ratios are
//! taken with integer division on non-negative numerators.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{classify_cases, ensure_applies, AntennaConfig, CaseLabel, ModelError, RisConfig};

/// Direction in which the RIS zeroes a cross channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EliminationMode {
    /// Leading rows (receive dimensions) are cancelled.
    Row,
    /// Leading columns (transmit dimensions) are cancelled.
    Column,
}

impl fmt::Display for EliminationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EliminationMode::Row => f.write_str("row"),
            EliminationMode::Column => f.write_str("column"),
        }
    }
}

/// How many rows/columns of each cross link the RIS cancels.
///
/// `f1` and `mode1` refer to the Tx2 -> Rx1 link (`H21`), `f2` and `mode2`
/// to the Tx1 -> Rx2 link (`H12`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EliminationPlan {
    pub f1: usize,
    pub f2: usize,
    pub mode1: EliminationMode,
    pub mode2: EliminationMode,
    pub cost: usize,
}

impl EliminationPlan {
    /// Plan with the case's modes and the cost of cancelling `(f1, f2)`.
    pub fn for_case(cfg: &AntennaConfig, case: CaseLabel, f1: usize, f2: usize) -> Self {
        let (mode1, mode2) = modes(case);
        let (c1, c2) = unit_costs(cfg, case);
        EliminationPlan { f1, f2, mode1, mode2, cost: f1 * c1 + f2 * c2 }
    }

    /// Number of channel entries this plan forces to zero.
    pub fn zeroed_entries(&self) -> usize {
        self.cost
    }
}

pub fn modes(case: CaseLabel) -> (EliminationMode, EliminationMode) {
    match case {
        CaseLabel::Case1 => (EliminationMode::Row, EliminationMode::Row),
        CaseLabel::Case2_1 | CaseLabel::Case2_2 => (EliminationMode::Column, EliminationMode::Row),
        CaseLabel::Case3 => (EliminationMode::Column, EliminationMode::Column),
    }
}

/// RIS elements consumed per eliminated row/column of `H21` and `H12`.
pub fn unit_costs(cfg: &AntennaConfig, case: CaseLabel) -> (usize, usize) {
    let (m1, m2, n1, n2) = cfg.counts();
    match case {
        CaseLabel::Case1 => (m2, m1),
        CaseLabel::Case2_1 | CaseLabel::Case2_2 => (n1, m1),
        CaseLabel::Case3 => (n1, n2),
    }
}

/// Upper limits of `(f1, f2)` for the case.
pub fn elimination_caps(cfg: &AntennaConfig, case: CaseLabel) -> (usize, usize) {
    let (m1, m2, n1, n2) = cfg.counts();
    match case {
        CaseLabel::Case1 => (n1, n2),
        CaseLabel::Case2_1 | CaseLabel::Case2_2 => (m2, n2),
        CaseLabel::Case3 => (m2, m1),
    }
}

/// Table entry for one case together with the plan attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseDof {
    pub case: CaseLabel,
    pub plan: EliminationPlan,
    pub sumdof: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofReport {
    pub config: AntennaConfig,
    pub ris: RisConfig,
    pub per_case: Vec<CaseDof>,
    pub achievable: usize,
    pub baseline: usize,
    pub gain: usize,
    pub ris_helps: bool,
}

impl DofReport {
    /// First case (in label order) whose entry equals the headline value.
    pub fn best(&self) -> &CaseDof {
        self.per_case
            .iter()
            .find(|c| c.sumdof == self.achievable)
            .expect("per_case is never empty")
    }
}

/// Sum-DoF of the two-user MIMO interference channel without RIS.
pub fn baseline_sumdof(cfg: &AntennaConfig) -> usize {
    let (m1, m2, n1, n2) = cfg.counts();
    (m1 + m2).min(n1 + n2).min(m1.max(n2)).min(m2.max(n1))
}

/// Budget at or above which both cross terms can be balanced.
pub fn budget_threshold(cfg: &AntennaConfig, case: CaseLabel) -> usize {
    let (m1, m2, n1, n2) = cfg.counts();
    match case {
        CaseLabel::Case1 => (m1 * m2).saturating_sub(m2 * m2),
        CaseLabel::Case2_1 => (m1 * n1).saturating_sub(n1 * n1),
        CaseLabel::Case2_2 => (m1 * n1).saturating_sub(m1 * m1),
        CaseLabel::Case3 => (n1 * n2).saturating_sub(n2 * n2),
    }
}

/// `floor((r - a*b + c^2) / (a + b))`, the integer part of a balancing ratio.
/// Only evaluated on the high-budget branch, where the numerator is >= 0.
fn balance_floor(r: usize, a: usize, b: usize, c: usize) -> usize {
    let num = r as i64 - (a * b) as i64 + (c * c) as i64;
    debug_assert!(num >= 0, "balancing numerator negative on the high-budget branch");
    num.max(0) as usize / (a + b)
}

/// Closed-form elimination counts for `case` under budget `ris.r`.
pub fn optimal_elimination(
    cfg: &AntennaConfig,
    ris: RisConfig,
    case: CaseLabel,
) -> Result<EliminationPlan, ModelError> {
    ensure_applies(cfg, case)?;
    let (m1, m2, n1, n2) = cfg.counts();
    let r = ris.r;
    let high = r >= budget_threshold(cfg, case);
    let (f1, f2) = match case {
        CaseLabel::Case1 if high => (
            balance_floor(r, m1, m2, m1).min(n1),
            balance_floor(r, m1, m2, m2).min(n2),
        ),
        CaseLabel::Case1 => ((r / m2).min(n1), 0),
        CaseLabel::Case2_1 | CaseLabel::Case2_2 if high => (
            balance_floor(r, m1, n1, m1).min(m2),
            balance_floor(r, m1, n1, n1).min(n2),
        ),
        CaseLabel::Case2_1 => ((r / n1).min(m2), 0),
        CaseLabel::Case2_2 => (0, (r / m1).min(n2)),
        CaseLabel::Case3 if high => (
            balance_floor(r, n1, n2, n2).min(m2),
            balance_floor(r, n1, n2, n1).min(m1),
        ),
        CaseLabel::Case3 => (0, (r / n2).min(m1)),
    };
    let plan = EliminationPlan::for_case(cfg, case, f1, f2);
    debug_assert!(plan.cost <= r);
    Ok(plan)
}

/// Table entry of the achievable sum-DoF for one case.
pub fn case_sumdof(cfg: &AntennaConfig, ris: RisConfig, case: CaseLabel) -> Result<usize, ModelError> {
    ensure_applies(cfg, case)?;
    let (m1, m2, n1, n2) = cfg.counts();
    let r = ris.r;
    let high = r >= budget_threshold(cfg, case);
    let value = match case {
        CaseLabel::Case1 if high => ((r + m1 * m1 + m2 * m2) / (m1 + m2)).min(m2 + n1).min(n1 + n2),
        CaseLabel::Case1 => (m2 + r / m2).min(m2 + n1).min(n1 + n2),
        CaseLabel::Case2_1 if high => ((r + m1 * m1 + n1 * n1) / (m1 + n1)).min(m2 + n1).min(n1 + n2),
        CaseLabel::Case2_1 => (n1 + r / n1).min(m2 + n1).min(n1 + n2),
        CaseLabel::Case2_2 if high => ((r + m1 * m1 + n1 * n1) / (m1 + n1)).min(m1 + n2).min(m1 + m2),
        CaseLabel::Case2_2 => (m1 + r / m1).min(m1 + n2).min(m1 + m2),
        CaseLabel::Case3 if high => ((r + n1 * n1 + n2 * n2) / (n1 + n2)).min(m1 + n2).min(m1 + m2),
        CaseLabel::Case3 => (n2 + r / n2).min(m1 + n2).min(m1 + m2),
    };
    Ok(value)
}

/// Min-form objective of the case's elimination problem at `(f1, f2)`.
pub fn plan_objective(cfg: &AntennaConfig, case: CaseLabel, f1: usize, f2: usize) -> usize {
    let (m1, m2, n1, n2) = cfg.counts();
    let limit = (m1 + m2).min(n1 + n2);
    let value = match case {
        CaseLabel::Case1 => (m2 + f1).min(m1 + f2),
        CaseLabel::Case2_1 | CaseLabel::Case2_2 => (n1 + f1).min(m1 + f2),
        CaseLabel::Case3 => (n1 + f1).min(n2 + f2),
    };
    value.min(limit)
}

/// Sufficient condition for a strictly positive RIS gain in `case`.
pub fn case_helps(cfg: &AntennaConfig, ris: RisConfig, case: CaseLabel) -> bool {
    let (m1, m2, n1, n2) = cfg.counts();
    let r = ris.r;
    let doubled = |base: usize, tie: bool| if tie { 2 * base } else { base };
    match case {
        CaseLabel::Case1 => r >= doubled(m2, m1 == m2) && m2 < n1 + n2,
        CaseLabel::Case2_1 => r >= doubled(n1, m1 == n1),
        CaseLabel::Case2_2 => r >= m1,
        CaseLabel::Case3 => r >= doubled(n2, n1 == n2) && n2 < m1 + m2,
    }
}

/// Whether any applicable case's sufficient condition for RIS gain holds.
pub fn ris_help_condition(cfg: &AntennaConfig, ris: RisConfig) -> bool {
    CaseLabel::ALL
        .iter()
        .filter(|c| c.applies(cfg))
        .any(|&c| case_helps(cfg, ris, c))
}

/// Evaluates every applicable case and reports the best achievable sum-DoF.
pub fn achievable_sumdof(cfg: &AntennaConfig, ris: RisConfig) -> Result<DofReport, ModelError> {
    let cases = classify_cases(cfg)?;
    let mut per_case = Vec::with_capacity(cases.len());
    for case in cases {
        let plan = optimal_elimination(cfg, ris, case)?;
        let sumdof = case_sumdof(cfg, ris, case)?;
        per_case.push(CaseDof { case, plan, sumdof });
    }
    let achievable = per_case.iter().map(|c| c.sumdof).max().unwrap_or(0);
    let baseline = baseline_sumdof(cfg);
    debug_assert!(achievable >= baseline);
    Ok(DofReport {
        config: *cfg,
        ris,
        per_case,
        achievable,
        baseline,
        gain: achievable.saturating_sub(baseline),
        ris_helps: ris_help_condition(cfg, ris),
    })
}

/// Closed-form RIS gain for `M1 = M2 = m`, `N1 = N2 = n`.
pub fn ris_gain_symmetric(m: usize, n: usize, r: usize) -> usize {
    if n <= m && m < 2 * n {
        (r / (2 * m)).min(2 * n - m)
    } else if m < n && n < 2 * m {
        (r / (2 * n)).min(2 * m - n)
    } else {
        0
    }
}
