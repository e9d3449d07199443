//! Brute-force reference for the elimination-count problems.
//!
//! Nothing here calls into [`crate::dof`]; the closed forms are checked
//! against plain enumeration of every feasible `(f1, f2)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AntennaConfig, CaseLabel, RisConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("search space has no feasible point")]
    Empty,
}

/// Box `[0, f1_max] x [0, f2_max]` cut by `cost1*f1 + cost2*f2 <= budget`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub f1_max: usize,
    pub f2_max: usize,
    pub cost1: usize,
    pub cost2: usize,
    pub budget: usize,
}

impl SearchSpace {
    pub fn is_feasible(&self, f1: usize, f2: usize) -> bool {
        f1 <= self.f1_max && f2 <= self.f2_max && self.cost1 * f1 + self.cost2 * f2 <= self.budget
    }

    pub fn feasible_points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.f1_max)
            .flat_map(move |f1| (0..=self.f2_max).map(move |f2| (f1, f2)))
            .filter(move |&(f1, f2)| self.is_feasible(f1, f2))
    }
}

/// Per-unit costs and caps of the case's elimination counts.
pub fn search_space(cfg: &AntennaConfig, ris: RisConfig, case: CaseLabel) -> SearchSpace {
    let (m1, m2, n1, n2) = cfg.counts();
    let (f1_max, f2_max, cost1, cost2) = match case {
        CaseLabel::Case1 => (n1, n2, m2, m1),
        CaseLabel::Case2_1 | CaseLabel::Case2_2 => (m2, n2, n1, m1),
        CaseLabel::Case3 => (m2, m1, n1, n2),
    };
    SearchSpace { f1_max, f2_max, cost1, cost2, budget: ris.r }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Optimum {
    pub f1: usize,
    pub f2: usize,
    pub value: usize,
}

/// Exhaustive maximization; ties go to the smallest `f1`, then smallest `f2`.
pub fn brute_force_optimum<F>(space: &SearchSpace, objective: F) -> Result<Optimum, OracleError>
where
    F: Fn(usize, usize) -> usize,
{
    let mut best: Option<Optimum> = None;
    for (f1, f2) in space.feasible_points() {
        let value = objective(f1, f2);
        if best.is_none_or(|b| value > b.value) {
            best = Some(Optimum { f1, f2, value });
        }
    }
    best.ok_or(OracleError::Empty)
}

/// Full four-term min-form objective of the case's elimination problem.
pub fn per_case_objective(cfg: &AntennaConfig, case: CaseLabel) -> impl Fn(usize, usize) -> usize {
    let (m1, m2, n1, n2) = cfg.counts();
    move |f1, f2| match case {
        CaseLabel::Case1 => (m2 + f1).min(m1 + f2).min(n1 + n2).min(m1 + m2),
        CaseLabel::Case2_1 | CaseLabel::Case2_2 => {
            (n1 + f1).min(m1 + f2).min(m1 + m2).min(n1 + n2)
        }
        CaseLabel::Case3 => (n1 + f1).min(n2 + f2).min(m1 + m2).min(n1 + n2),
    }
}

/// Three-term objective after dropping the term that never binds under the
/// case premises (Case 2 keeps all four).
pub fn simplified_objective(cfg: &AntennaConfig, case: CaseLabel, f1: usize, f2: usize) -> usize {
    let (m1, m2, n1, n2) = cfg.counts();
    match case {
        CaseLabel::Case1 => (m2 + f1).min(m1 + f2).min(n1 + n2),
        CaseLabel::Case2_1 | CaseLabel::Case2_2 => {
            (n1 + f1).min(m1 + f2).min(m1 + m2).min(n1 + n2)
        }
        CaseLabel::Case3 => (n1 + f1).min(n2 + f2).min(m1 + m2),
    }
}

/// Sum-DoF rebuilt from zero-forcing and interference-decoding dimensions,
/// branch by branch, then limited by the transmit dimension `m1 + m2`.
///
/// This is the deep oracle: it never forms the min-expression directly.
pub fn subcase_sumdof(cfg: &AntennaConfig, case: CaseLabel, f1: usize, f2: usize) -> usize {
    let (m1, m2, n1, n2) = cfg.counts();
    let (m1, m2, n1, n2, f1, f2) = (
        m1 as i64, m2 as i64, n1 as i64, n2 as i64, f1 as i64, f2 as i64,
    );
    let raw = match case {
        CaseLabel::Case1 => {
            let zf1 = m1 - (n2 - f2);
            let zf2 = m2 - (n1 - f1);
            match (zf1 <= n1, zf2 <= n2) {
                (true, true) => zf1 + zf2 + (n1 + n2 - m1 - f2).min(n1 + n2 - m2 - f1),
                (false, false) => n1 + n2,
                (true, false) => zf1 + n2,
                (false, true) => n1 + zf2,
            }
        }
        CaseLabel::Case2_1 | CaseLabel::Case2_2 => {
            let zf1 = m1 - (n2 - f2);
            match (zf1 <= n1, f1 <= n2) {
                (true, true) => zf1 + f1 + (n2 - f1).min(n1 + n2 - m1 - f2),
                (false, false) => n1 + n2,
                (true, false) => zf1 + n2,
                (false, true) => n1 + f1,
            }
        }
        CaseLabel::Case3 => {
            if f1 <= n2 {
                f2 + f1 + (n1 - f2).min(n2 - f1)
            } else {
                f2 + n2
            }
        }
    };
    raw.min(m1 + m2).max(0) as usize
}

/// Brute-force optimum of the case objective for budget `ris.r`.
pub fn case_optimum(cfg: &AntennaConfig, ris: RisConfig, case: CaseLabel) -> Optimum {
    let space = search_space(cfg, ris, case);
    brute_force_optimum(&space, per_case_objective(cfg, case))
        .expect("(0, 0) is always feasible")
}
