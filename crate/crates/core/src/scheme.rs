//! Numerical synthesis of the RIS reflection vector.
//!
//! The RIS adds `G_j diag(psi) D_i` to every link `H_ij` (Tx i -> Rx j). The
//! zeroing constraints on the two cross links are linear in `psi`; stacking
//! them gives an underdetermined system solved in the minimum-norm sense.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dof::{modes, optimal_elimination, EliminationMode, EliminationPlan};
use crate::linalg::{is_full_rank, max_abs, min_norm_solve, numerical_rank, random_matrix, singular_values, vstack, CMat, CVec};
use crate::model::{ensure_applies, AntennaConfig, CaseLabel, ModelError, RisConfig};

/// Zero-block and residual tolerance, relative.
pub const ZERO_TOL: f64 = 1e-9;
/// Singular value threshold for rank decisions, relative to `sigma_max`.
pub const RANK_TOL: f64 = 1e-8;
/// Smallest acceptable `sigma_min / sigma_max` of the stacked system.
pub const CONDITION_TOL: f64 = 1e-10;
/// Channel draws attempted before giving up.
pub const MAX_RESAMPLES: usize = 10;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("channel draw not full rank after {0} attempts")]
    RankDeficientChannels(usize),
    #[error("{rows} zeroing constraints exceed the {r} RIS elements")]
    InfeasibleBudget { rows: usize, r: usize },
    #[error("stacked system ill-conditioned (sigma_min/sigma_max = {ratio:.3e})")]
    IllConditioned { ratio: f64 },
    #[error("solver residual {residual:.3e} above bound {bound:.3e}")]
    Residual { residual: f64, bound: f64 },
    #[error("cancelled block of {link} has magnitude {magnitude:.3e} above {bound:.3e}")]
    ZeroBlockViolation { link: &'static str, magnitude: f64, bound: f64 },
}

/// Direct, Tx->RIS and RIS->Rx channels of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Tx1 -> Rx1, `n1 x m1`.
    pub h11: CMat,
    /// Tx2 -> Rx1, `n1 x m2`.
    pub h21: CMat,
    /// Tx1 -> Rx2, `n2 x m1`.
    pub h12: CMat,
    /// Tx2 -> Rx2, `n2 x m2`.
    pub h22: CMat,
    /// Tx1 -> RIS, `r x m1`.
    pub d1: CMat,
    /// Tx2 -> RIS, `r x m2`.
    pub d2: CMat,
    /// RIS -> Rx1, `n1 x r`.
    pub g1: CMat,
    /// RIS -> Rx2, `n2 x r`.
    pub g2: CMat,
    pub seed: u64,
}

impl ChannelSet {
    fn matrices(&self) -> [&CMat; 8] {
        [&self.h11, &self.h21, &self.h12, &self.h22, &self.d1, &self.d2, &self.g1, &self.g2]
    }

    pub fn all_full_rank(&self) -> bool {
        self.matrices().iter().all(|m| is_full_rank(m, RANK_TOL))
    }
}

/// Diagonal of the RIS reflection matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RisVector {
    pub psi: CVec,
    pub max_magnitude: f64,
    /// `||Gamma psi - rhs||` of the solve that produced `psi`.
    pub residual: f64,
    pub rhs_norm: f64,
}

impl RisVector {
    pub fn zeros(r: usize) -> Self {
        RisVector { psi: CVec::zeros(r), max_magnitude: 0.0, residual: 0.0, rhs_norm: 0.0 }
    }
}

/// Zeroing constraints of both cross links.
#[derive(Debug, Clone)]
pub struct GammaSystem {
    /// Rows for the cancelled entries of `H21`.
    pub gamma1: CMat,
    /// Rows for the cancelled entries of `H12`.
    pub gamma2: CMat,
    /// Negated cancelled entries, `H21` part first.
    pub rhs: CVec,
}

impl GammaSystem {
    pub fn rows(&self) -> usize {
        self.gamma1.nrows() + self.gamma2.nrows()
    }

    pub fn stacked(&self) -> CMat {
        vstack(&self.gamma1, &self.gamma2)
    }
}

/// Channels seen by the transceivers once the RIS is configured.
#[derive(Debug, Clone)]
pub struct EffectiveChannels {
    pub hbar11: CMat,
    pub hbar21: CMat,
    pub hbar12: CMat,
    pub hbar22: CMat,
    pub plan: EliminationPlan,
    /// Largest cancelled entry of `hbar21` over `1 + ||H21||_F`.
    pub zero_error21: f64,
    /// Same for `hbar12`.
    pub zero_error12: f64,
    /// Spectral norms of the original cross links, used as rank scale.
    scale21: f64,
    scale12: f64,
}

impl EffectiveChannels {
    pub fn rank21(&self) -> usize {
        rank_scaled(&self.hbar21, self.scale21)
    }

    pub fn rank12(&self) -> usize {
        rank_scaled(&self.hbar12, self.scale12)
    }

    /// `(rank hbar21, rank hbar12)` predicted by the plan.
    pub fn expected_ranks(&self) -> (usize, usize) {
        let (n1, m2) = self.hbar21.shape();
        let (n2, m1) = self.hbar12.shape();
        let p = &self.plan;
        let r21 = match p.mode1 {
            EliminationMode::Row => n1 - p.f1,
            EliminationMode::Column => m2 - p.f1,
        };
        let r12 = match p.mode2 {
            EliminationMode::Row => n2 - p.f2,
            EliminationMode::Column => m1 - p.f2,
        };
        (r21, r12)
    }

    /// Non-cancelled part of `hbar21` (rows or columns after the first `f1`).
    pub fn residual21(&self) -> CMat {
        residual_block(&self.hbar21, self.plan.f1, self.plan.mode1)
    }

    pub fn residual12(&self) -> CMat {
        residual_block(&self.hbar12, self.plan.f2, self.plan.mode2)
    }

    pub fn ranks_match(&self) -> bool {
        (self.rank21(), self.rank12()) == self.expected_ranks()
    }

    pub fn residuals_full_rank(&self) -> bool {
        let r21 = self.residual21();
        let r12 = self.residual12();
        rank_scaled(&r21, self.scale21) == r21.nrows().min(r21.ncols())
            && rank_scaled(&r12, self.scale12) == r12.nrows().min(r12.ncols())
    }
}

fn rank_scaled(m: &CMat, reference: f64) -> usize {
    let own = singular_values(m).first().copied().unwrap_or(0.0);
    numerical_rank(m, RANK_TOL, Some(own.max(reference)))
}

fn residual_block(m: &CMat, f: usize, mode: EliminationMode) -> CMat {
    match mode {
        EliminationMode::Row => m.rows(f, m.nrows() - f).into_owned(),
        EliminationMode::Column => m.columns(f, m.ncols() - f).into_owned(),
    }
}

fn cancelled_block(m: &CMat, f: usize, mode: EliminationMode) -> CMat {
    match mode {
        EliminationMode::Row => m.rows(0, f).into_owned(),
        EliminationMode::Column => m.columns(0, f).into_owned(),
    }
}

fn derived_seed(seed: u64, attempt: usize) -> u64 {
    seed ^ (attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Draws i.i.d. CN(0, 1) channels; redraws (bounded) until all are full rank.
pub fn generate_channels(cfg: &AntennaConfig, ris: RisConfig, seed: u64) -> Result<ChannelSet, SchemeError> {
    let (m1, m2, n1, n2) = cfg.counts();
    let r = ris.r;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESAMPLES {
        let ch = ChannelSet {
            h11: random_matrix(&mut rng, n1, m1),
            h21: random_matrix(&mut rng, n1, m2),
            h12: random_matrix(&mut rng, n2, m1),
            h22: random_matrix(&mut rng, n2, m2),
            d1: random_matrix(&mut rng, r, m1),
            d2: random_matrix(&mut rng, r, m2),
            g1: random_matrix(&mut rng, n1, r),
            g2: random_matrix(&mut rng, n2, r),
            seed,
        };
        if ch.all_full_rank() {
            return Ok(ch);
        }
    }
    Err(SchemeError::RankDeficientChannels(MAX_RESAMPLES))
}

/// Rows of the vectorized zeroing constraints for one cross link.
///
/// `g` is the receiver-side RIS channel, `d` the transmitter-side one and `h`
/// the direct cross channel. Row mode stacks `vec(H^T)` (row `k`, entry `i`
/// at index `k*cols + i`); column mode stacks `vec(H)` (column `k`, entry `i`
/// at index `k*rows + i`). Only the first `f` rows/columns are kept.
fn link_rows(g: &CMat, d: &CMat, h: &CMat, f: usize, mode: EliminationMode) -> (CMat, Vec<num_complex::Complex64>) {
    let r = g.ncols();
    assert_eq!(d.nrows(), r, "RIS dimension mismatch");
    assert_eq!((h.nrows(), h.ncols()), (g.nrows(), d.ncols()), "cross channel shape mismatch");
    let inner = match mode {
        EliminationMode::Row => h.ncols(),
        EliminationMode::Column => h.nrows(),
    };
    let mut gamma = CMat::zeros(f * inner, r);
    let mut rhs = Vec::with_capacity(f * inner);
    for k in 0..f {
        for i in 0..inner {
            let row = k * inner + i;
            let (rx, tx) = match mode {
                EliminationMode::Row => (k, i),
                EliminationMode::Column => (i, k),
            };
            for j in 0..r {
                gamma[(row, j)] = g[(rx, j)] * d[(j, tx)];
            }
            rhs.push(-h[(rx, tx)]);
        }
    }
    (gamma, rhs)
}

/// Assembles the zeroing system for `plan` on the channels `ch`.
pub fn build_gamma(ch: &ChannelSet, plan: &EliminationPlan, case: CaseLabel) -> GammaSystem {
    assert_eq!((plan.mode1, plan.mode2), modes(case), "plan modes do not match {case}");
    let (gamma1, rhs1) = link_rows(&ch.g1, &ch.d2, &ch.h21, plan.f1, plan.mode1);
    let (gamma2, rhs2) = link_rows(&ch.g2, &ch.d1, &ch.h12, plan.f2, plan.mode2);
    let rhs = CVec::from_iterator(rhs1.len() + rhs2.len(), rhs1.into_iter().chain(rhs2));
    GammaSystem { gamma1, gamma2, rhs }
}

/// Minimum-norm reflection vector meeting every zeroing constraint.
pub fn solve_psi(sys: &GammaSystem, ris: RisConfig) -> Result<RisVector, SchemeError> {
    let rows = sys.rows();
    if rows > ris.r {
        return Err(SchemeError::InfeasibleBudget { rows, r: ris.r });
    }
    if rows == 0 {
        return Ok(RisVector::zeros(ris.r));
    }
    let a = sys.stacked();
    assert_eq!(a.ncols(), ris.r, "system width differs from RIS size");
    let sol = min_norm_solve(&a, &sys.rhs, CONDITION_TOL);
    if sol.conditioning < CONDITION_TOL {
        return Err(SchemeError::IllConditioned { ratio: sol.conditioning });
    }
    let bound = ZERO_TOL * (1.0 + sys.rhs.norm());
    if sol.residual > bound {
        return Err(SchemeError::Residual { residual: sol.residual, bound });
    }
    let max_magnitude = sol.x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(RisVector { psi: sol.x, max_magnitude, residual: sol.residual, rhs_norm: sys.rhs.norm() })
}

fn through_ris(g: &CMat, psi: &CVec, d: &CMat) -> CMat {
    // G diag(psi) D without forming the diagonal matrix
    let mut scaled = d.clone();
    for (j, mut row) in scaled.row_iter_mut().enumerate() {
        row *= psi[j];
    }
    g * scaled
}

/// `hbar_ij = h_ij + g_j diag(psi) d_i` for all four links, with the
/// cancelled blocks checked against [`ZERO_TOL`].
pub fn effective_channels(
    ch: &ChannelSet,
    psi: &RisVector,
    plan: &EliminationPlan,
    case: CaseLabel,
) -> Result<EffectiveChannels, SchemeError> {
    assert_eq!((plan.mode1, plan.mode2), modes(case), "plan modes do not match {case}");
    let psi_v = &psi.psi;
    let hbar11 = &ch.h11 + through_ris(&ch.g1, psi_v, &ch.d1);
    let hbar21 = &ch.h21 + through_ris(&ch.g1, psi_v, &ch.d2);
    let hbar12 = &ch.h12 + through_ris(&ch.g2, psi_v, &ch.d1);
    let hbar22 = &ch.h22 + through_ris(&ch.g2, psi_v, &ch.d2);

    let zero_error21 = max_abs(&cancelled_block(&hbar21, plan.f1, plan.mode1)) / (1.0 + ch.h21.norm());
    let zero_error12 = max_abs(&cancelled_block(&hbar12, plan.f2, plan.mode2)) / (1.0 + ch.h12.norm());
    for (link, err) in [("hbar21", zero_error21), ("hbar12", zero_error12)] {
        if err > ZERO_TOL {
            return Err(SchemeError::ZeroBlockViolation { link, magnitude: err, bound: ZERO_TOL });
        }
    }
    let scale21 = singular_values(&ch.h21).first().copied().unwrap_or(0.0);
    let scale12 = singular_values(&ch.h12).first().copied().unwrap_or(0.0);
    Ok(EffectiveChannels {
        hbar11,
        hbar21,
        hbar12,
        hbar22,
        plan: *plan,
        zero_error21,
        zero_error12,
        scale21,
        scale12,
    })
}

/// Everything produced by one end-to-end synthesis.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub case: CaseLabel,
    pub channels: ChannelSet,
    pub psi: RisVector,
    pub effective: EffectiveChannels,
    /// Channel draws that were rejected before this one.
    pub resamples: usize,
}

/// Draws channels, picks the closed-form plan, solves for `psi` and forms the
/// effective channels. Ill-conditioned draws, and draws whose solve misses
/// the residual bound, are replaced (bounded retries).
pub fn synthesize(cfg: &AntennaConfig, ris: RisConfig, case: CaseLabel, seed: u64) -> Result<Synthesis, SchemeError> {
    ensure_applies(cfg, case)?;
    let plan = optimal_elimination(cfg, ris, case)?;
    synthesize_plan(cfg, ris, case, &plan, seed)
}

/// As [`synthesize`] but with a caller-chosen plan.
pub fn synthesize_plan(
    cfg: &AntennaConfig,
    ris: RisConfig,
    case: CaseLabel,
    plan: &EliminationPlan,
    seed: u64,
) -> Result<Synthesis, SchemeError> {
    ensure_applies(cfg, case)?;
    let mut last = None;
    for attempt in 0..MAX_RESAMPLES {
        let channels = generate_channels(cfg, ris, derived_seed(seed, attempt))?;
        let sys = build_gamma(&channels, plan, case);
        match solve_psi(&sys, ris) {
            Ok(psi) => {
                let effective = effective_channels(&channels, &psi, plan, case)?;
                return Ok(Synthesis { case, channels, psi, effective, resamples: attempt });
            }
            Err(e @ (SchemeError::IllConditioned { .. } | SchemeError::Residual { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// JSON view of a synthesized instance; matrices are row-major arrays of
/// `[re, im]` pairs.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceDump {
    pub config: AntennaConfig,
    pub r: usize,
    pub seed: u64,
    pub case: CaseLabel,
    pub plan: EliminationPlan,
    pub psi: Vec<[f64; 2]>,
    pub residual: f64,
    pub max_magnitude: f64,
    pub ranks: RankSummary,
    pub zero_error21: f64,
    pub zero_error12: f64,
    pub effective: EffectiveDump,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankSummary {
    pub hbar21: usize,
    pub hbar12: usize,
    pub expected21: usize,
    pub expected12: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EffectiveDump {
    pub hbar11: Vec<Vec<[f64; 2]>>,
    pub hbar21: Vec<Vec<[f64; 2]>>,
    pub hbar12: Vec<Vec<[f64; 2]>>,
    pub hbar22: Vec<Vec<[f64; 2]>>,
}

pub fn matrix_pairs(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl InstanceDump {
    pub fn new(cfg: &AntennaConfig, ris: RisConfig, seed: u64, syn: &Synthesis) -> Self {
        let eff = &syn.effective;
        let (expected21, expected12) = eff.expected_ranks();
        InstanceDump {
            config: *cfg,
            r: ris.r,
            seed,
            case: syn.case,
            plan: eff.plan,
            psi: syn.psi.psi.iter().map(|z| [z.re, z.im]).collect(),
            residual: syn.psi.residual,
            max_magnitude: syn.psi.max_magnitude,
            ranks: RankSummary { hbar21: eff.rank21(), hbar12: eff.rank12(), expected21, expected12 },
            zero_error21: eff.zero_error21,
            zero_error12: eff.zero_error12,
            effective: EffectiveDump {
                hbar11: matrix_pairs(&eff.hbar11),
                hbar21: matrix_pairs(&eff.hbar21),
                hbar12: matrix_pairs(&eff.hbar12),
                hbar22: matrix_pairs(&eff.hbar22),
            },
        }
    }
}
