//! Zero-forcing / interference-decoding transceivers on the effective channels.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dof::{optimal_elimination, plan_objective, EliminationMode, EliminationPlan};
use crate::linalg::{hstack, log2det_gain, null_space, numerical_rank, orthonormal_columns, random_matrix, CMat};
use crate::model::{ensure_applies, AntennaConfig, CaseLabel, ModelError, RisConfig};
use crate::scheme::{synthesize_plan, EffectiveChannels, SchemeError, Synthesis, RANK_TOL, ZERO_TOL};

#[derive(Debug, Error)]
pub enum TransceiverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("{tx} needs {needed} {kind} directions but only {available} exist")]
    AllocationInfeasible { tx: Transmitter, kind: &'static str, needed: usize, available: usize },
    #[error("rank test fails for both ID-stream owners: {cfg} {case} f=({f1}, {f2})")]
    Undecodable { cfg: AntennaConfig, case: CaseLabel, f1: usize, f2: usize },
    #[error("SNR window must satisfy hi > lo >= 60 dB (got {lo} -> {hi})")]
    SnrWindow { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transmitter {
    Tx1,
    Tx2,
}

impl Transmitter {
    pub fn other(self) -> Self {
        match self {
            Transmitter::Tx1 => Transmitter::Tx2,
            Transmitter::Tx2 => Transmitter::Tx1,
        }
    }
}

impl fmt::Display for Transmitter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transmitter::Tx1 => f.write_str("Tx1"),
            Transmitter::Tx2 => f.write_str("Tx2"),
        }
    }
}

/// Stream counts of the scheme.
///
/// `id_owner` carries as many ID streams as its headroom allows; any excess
/// goes to the other transmitter (`id_tx1 + id_tx2 = d_id`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamAllocation {
    pub d1_zf: usize,
    pub d2_zf: usize,
    pub d_id: usize,
    pub id_owner: Transmitter,
    pub id_tx1: usize,
    pub id_tx2: usize,
    pub total: usize,
}

impl StreamAllocation {
    pub fn tx1_streams(&self) -> usize {
        self.d1_zf + self.id_tx1
    }

    pub fn tx2_streams(&self) -> usize {
        self.d2_zf + self.id_tx2
    }

    /// Same counts with the ID streams split in favour of `owner`.
    pub fn with_owner(&self, cfg: &AntennaConfig, owner: Transmitter) -> Self {
        let head1 = cfg.m1.saturating_sub(self.d1_zf);
        let head2 = cfg.m2.saturating_sub(self.d2_zf);
        let (id_tx1, id_tx2) = match owner {
            Transmitter::Tx1 => {
                let a = self.d_id.min(head1);
                (a, self.d_id - a)
            }
            Transmitter::Tx2 => {
                let b = self.d_id.min(head2);
                (self.d_id - b, b)
            }
        };
        StreamAllocation { id_owner: owner, id_tx1, id_tx2, ..*self }
    }
}

/// Stream counts for `plan`, clipped so the total equals the plan's objective.
pub fn allocate_streams(
    cfg: &AntennaConfig,
    plan: &EliminationPlan,
    case: CaseLabel,
) -> Result<StreamAllocation, ModelError> {
    ensure_applies(cfg, case)?;
    let (m1, m2, n1, n2) = cfg.counts();
    let (m1, m2, n1, n2) = (m1 as i64, m2 as i64, n1 as i64, n2 as i64);
    let (f1, f2) = (plan.f1 as i64, plan.f2 as i64);
    let pos = |x: i64| x.max(0);
    let (d1, d2, id) = match case {
        CaseLabel::Case1 => (
            pos((m1 - (n2 - f2)).min(n1)),
            pos((m2 - (n1 - f1)).min(n2)),
            pos(n1 + n2 - m1 - f2).min(pos(n1 + n2 - m2 - f1)),
        ),
        CaseLabel::Case2_1 | CaseLabel::Case2_2 => (
            pos((m1 - (n2 - f2)).min(n1)),
            f1.min(n2),
            pos(n1 + n2 - m1 - f2).min(pos(n2 - f1)),
        ),
        CaseLabel::Case3 => (f2, f1.min(n2), (n1 - f2).min(pos(n2 - f1))),
    };
    let target = plan_objective(cfg, case, plan.f1, plan.f2) as i64;
    let id = pos(id - pos(d1 + d2 + id - target));
    let total = d1 + d2 + id;
    assert_eq!(total, target, "stream counting short of the objective for {cfg} {case}");

    let (d1, d2, id) = (d1 as usize, d2 as usize, id as usize);
    let owner = if cfg.m2.saturating_sub(d2) > cfg.m1.saturating_sub(d1) {
        Transmitter::Tx2
    } else {
        Transmitter::Tx1
    };
    let alloc = StreamAllocation {
        d1_zf: d1,
        d2_zf: d2,
        d_id: id,
        id_owner: owner,
        id_tx1: 0,
        id_tx2: 0,
        total: total as usize,
    };
    Ok(alloc.with_owner(cfg, owner))
}

/// Transmit beamformers. The first `zf1` (`zf2`) columns are zero-forcing,
/// the rest carry ID streams.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderPair {
    pub p1: CMat,
    pub p2: CMat,
    pub zf1: usize,
    pub zf2: usize,
}

impl PrecoderPair {
    pub fn zf_block1(&self) -> CMat {
        self.p1.columns(0, self.zf1).into_owned()
    }

    pub fn id_block1(&self) -> CMat {
        self.p1.columns(self.zf1, self.p1.ncols() - self.zf1).into_owned()
    }

    pub fn zf_block2(&self) -> CMat {
        self.p2.columns(0, self.zf2).into_owned()
    }

    pub fn id_block2(&self) -> CMat {
        self.p2.columns(self.zf2, self.p2.ncols() - self.zf2).into_owned()
    }
}

/// Orthonormal inputs annihilated by the cross channel `h`.
///
/// Column mode lists the cancelled inputs first as standard basis vectors,
/// then null vectors of the remaining columns.
fn zf_basis(h: &CMat, f: usize, mode: EliminationMode) -> CMat {
    let m = h.ncols();
    match mode {
        EliminationMode::Row => {
            let rest = h.rows(f, h.nrows() - f).into_owned();
            null_space(&rest, RANK_TOL)
        }
        EliminationMode::Column => {
            let rest = h.columns(f, m - f).into_owned();
            let extra = if rest.ncols() == 0 { CMat::zeros(0, 0) } else { null_space(&rest, RANK_TOL) };
            let mut basis = CMat::zeros(m, f + extra.ncols());
            for k in 0..f {
                basis[(k, k)] = crate::linalg::c(1.0, 0.0);
            }
            for k in 0..extra.ncols() {
                for i in 0..extra.nrows() {
                    basis[(f + i, f + k)] = extra[(i, k)];
                }
            }
            basis
        }
    }
}

fn transmitter_precoder(
    tx: Transmitter,
    cross: &CMat,
    f: usize,
    mode: EliminationMode,
    zf: usize,
    id: usize,
    rng: &mut ChaCha8Rng,
) -> Result<CMat, TransceiverError> {
    let m = cross.ncols();
    let basis = zf_basis(cross, f, mode);
    if basis.ncols() < zf {
        return Err(TransceiverError::AllocationInfeasible {
            tx,
            kind: "zero-forcing",
            needed: zf,
            available: basis.ncols(),
        });
    }
    let zf_block = basis.columns(0, zf).into_owned();
    if zf + id > m {
        return Err(TransceiverError::AllocationInfeasible {
            tx,
            kind: "input",
            needed: zf + id,
            available: m,
        });
    }
    let raw = random_matrix(rng, m, id);
    let projected = &raw - &zf_block * (zf_block.adjoint() * &raw);
    let id_block = orthonormal_columns(&projected);
    Ok(hstack(&[&zf_block, &id_block]))
}

/// Precoders for `alloc` on `eff`; ID directions are drawn from `seed`.
pub fn build_precoders(
    eff: &EffectiveChannels,
    alloc: &StreamAllocation,
    seed: u64,
) -> Result<PrecoderPair, TransceiverError> {
    let plan = &eff.plan;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5EED));
    let p1 = transmitter_precoder(Transmitter::Tx1, &eff.hbar12, plan.f2, plan.mode2, alloc.d1_zf, alloc.id_tx1, &mut rng)?;
    let p2 = transmitter_precoder(Transmitter::Tx2, &eff.hbar21, plan.f1, plan.mode1, alloc.d2_zf, alloc.id_tx2, &mut rng)?;
    Ok(PrecoderPair { p1, p2, zf1: alloc.d1_zf, zf2: alloc.d2_zf })
}

/// Rank and leakage figures behind [`verify_decodability`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecodabilityReport {
    pub rank_rx1: usize,
    pub needed_rx1: usize,
    pub rank_rx2: usize,
    pub needed_rx2: usize,
    /// `||hbar21 P2_zf||_F / (1 + ||hbar21||_F)`.
    pub leak_rx1: f64,
    /// `||hbar12 P1_zf||_F / (1 + ||hbar12||_F)`.
    pub leak_rx2: f64,
}

impl DecodabilityReport {
    pub fn full_rank(&self) -> bool {
        self.rank_rx1 == self.needed_rx1 && self.rank_rx2 == self.needed_rx2
    }

    pub fn passes(&self, leak_tol: f64) -> bool {
        self.full_rank() && self.leak_rx1 <= leak_tol && self.leak_rx2 <= leak_tol
    }
}

fn leak(h: &CMat, p: &CMat) -> f64 {
    if p.ncols() == 0 {
        return 0.0;
    }
    (h * p).norm() / (1.0 + h.norm())
}

pub fn decodability_report(eff: &EffectiveChannels, pre: &PrecoderPair) -> DecodabilityReport {
    let rx1 = hstack(&[&(&eff.hbar11 * &pre.p1), &(&eff.hbar21 * pre.id_block2())]);
    let rx2 = hstack(&[&(&eff.hbar22 * &pre.p2), &(&eff.hbar12 * pre.id_block1())]);
    DecodabilityReport {
        rank_rx1: numerical_rank(&rx1, RANK_TOL, None),
        needed_rx1: rx1.ncols(),
        rank_rx2: numerical_rank(&rx2, RANK_TOL, None),
        needed_rx2: rx2.ncols(),
        leak_rx1: leak(&eff.hbar21, &pre.zf_block2()),
        leak_rx2: leak(&eff.hbar12, &pre.zf_block1()),
    }
}

/// Whether both receivers can jointly decode their own streams plus the
/// other side's ID streams with the zero-forced interference nulled.
pub fn verify_decodability(eff: &EffectiveChannels, _alloc: &StreamAllocation, pre: &PrecoderPair) -> bool {
    decodability_report(eff, pre).passes(ZERO_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateProbe {
    pub snr_db: f64,
    pub sum_rate: f64,
}

struct ReceiverRates {
    /// Own streams only.
    own: f64,
    /// Own streams plus the other side's ID streams.
    joint: f64,
    own_zf: f64,
    own_id: f64,
}

fn receiver_rates(direct: &CMat, cross: &CMat, own: &CMat, own_zf: usize, other: &CMat, other_zf: usize, power: f64) -> ReceiverRates {
    let n = direct.nrows();
    let scale = |p: &CMat| if p.ncols() == 0 { 0.0 } else { (power / p.ncols() as f64).sqrt() };
    let (s_own, s_other) = (scale(own), scale(other));
    let leak = cross * other.columns(0, other_zf) * crate::linalg::c(s_other, 0.0);
    let k = CMat::identity(n, n) + &leak * leak.adjoint();
    let d = direct * own * crate::linalg::c(s_own, 0.0);
    let i = cross * other.columns(other_zf, other.ncols() - other_zf) * crate::linalg::c(s_other, 0.0);
    let d_zf = d.columns(0, own_zf).into_owned();
    let d_id = d.columns(own_zf, d.ncols() - own_zf).into_owned();
    ReceiverRates {
        own: log2det_gain(&k, &d),
        joint: log2det_gain(&k, &hstack(&[&d, &i])),
        own_zf: log2det_gain(&k, &d_zf),
        own_id: log2det_gain(&k, &d_id),
    }
}

/// Two-user sum rate with equal power per stream and unit noise.
///
/// Each ID stream is charged once: its rate is the smaller of what the
/// owner and the other receiver can decode.
pub fn sum_rate(eff: &EffectiveChannels, pre: &PrecoderPair, _alloc: &StreamAllocation, snr_db: f64) -> RateProbe {
    let power = 10f64.powf(snr_db / 10.0);
    let a = receiver_rates(&eff.hbar11, &eff.hbar21, &pre.p1, pre.zf1, &pre.p2, pre.zf2, power);
    let b = receiver_rates(&eff.hbar22, &eff.hbar12, &pre.p2, pre.zf2, &pre.p1, pre.zf1, power);
    let id1 = (b.joint - b.own).min(a.own - a.own_zf).max(0.0);
    let zf1 = (a.own - id1).min(a.own - a.own_id).max(0.0);
    let id2 = (a.joint - a.own).min(b.own - b.own_zf).max(0.0);
    let zf2 = (b.own - id2).min(b.own - b.own_id).max(0.0);
    RateProbe { snr_db, sum_rate: id1 + zf1 + id2 + zf2 }
}

/// A complete, decodable realization of the scheme.
#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub synthesis: Synthesis,
    pub alloc: StreamAllocation,
    pub precoders: PrecoderPair,
    pub report: DecodabilityReport,
}

/// Synthesizes the RIS for the closed-form plan and builds transceivers.
///
/// If the rank test fails with the preferred ID owner, the split is redone
/// in favour of the other transmitter before giving up.
pub fn run_scheme(cfg: &AntennaConfig, ris: RisConfig, case: CaseLabel, seed: u64) -> Result<SchemeRun, TransceiverError> {
    let plan = optimal_elimination(cfg, ris, case)?;
    run_plan(cfg, ris, case, &plan, seed)
}

pub fn run_plan(
    cfg: &AntennaConfig,
    ris: RisConfig,
    case: CaseLabel,
    plan: &EliminationPlan,
    seed: u64,
) -> Result<SchemeRun, TransceiverError> {
    let synthesis = synthesize_plan(cfg, ris, case, plan, seed)?;
    let first = allocate_streams(cfg, plan, case)?;
    let mut candidates = vec![first];
    let swapped = first.with_owner(cfg, first.id_owner.other());
    if (swapped.id_tx1, swapped.id_tx2) != (first.id_tx1, first.id_tx2) {
        candidates.push(swapped);
    }
    for alloc in candidates {
        let precoders = match build_precoders(&synthesis.effective, &alloc, seed) {
            Ok(p) => p,
            Err(TransceiverError::AllocationInfeasible { .. }) => continue,
            Err(e) => return Err(e),
        };
        let report = decodability_report(&synthesis.effective, &precoders);
        if report.passes(ZERO_TOL) {
            return Ok(SchemeRun { synthesis, alloc, precoders, report });
        }
    }
    Err(TransceiverError::Undecodable { cfg: *cfg, case, f1: plan.f1, f2: plan.f2 })
}

impl SchemeRun {
    pub fn rate(&self, snr_db: f64) -> RateProbe {
        sum_rate(&self.synthesis.effective, &self.precoders, &self.alloc, snr_db)
    }

    pub fn slope(&self, snr_lo_db: f64, snr_hi_db: f64) -> f64 {
        let lo = self.rate(snr_lo_db).sum_rate;
        let hi = self.rate(snr_hi_db).sum_rate;
        (hi - lo) / ((snr_hi_db - snr_lo_db) / 10.0 * 10f64.log2())
    }
}

/// High-SNR slope of the sum rate, in streams.
pub fn estimate_slope(
    cfg: &AntennaConfig,
    ris: RisConfig,
    case: CaseLabel,
    seed: u64,
    snr_lo_db: f64,
    snr_hi_db: f64,
) -> Result<f64, TransceiverError> {
    if !(snr_hi_db > snr_lo_db && snr_lo_db >= 60.0) {
        return Err(TransceiverError::SnrWindow { lo: snr_lo_db, hi: snr_hi_db });
    }
    Ok(run_scheme(cfg, ris, case, seed)?.slope(snr_lo_db, snr_hi_db))
}
