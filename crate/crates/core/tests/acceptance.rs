//! Acceptance criteria. Runs as a plain binary (`harness = false`) so every
//! criterion prints exactly one PASS/FAIL line.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use ris_dof::dof::{achievable_sumdof, case_sumdof, ris_gain_symmetric, ris_help_condition};
use ris_dof::model::{canonicalize, classify_cases, AntennaConfig, CaseLabel, RisConfig};
use ris_dof::oracle::{per_case_objective, search_space, subcase_sumdof};
use ris_dof::scheme::synthesize;
use ris_dof::sweep::{run_sweep, to_csv_string, SweepSpec};
use ris_dof::transceiver::estimate_slope;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Canonical configurations of `[1, hi]^4`, each once.
fn canonical_grid(hi: i64) -> Vec<AntennaConfig> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for m1 in 1..=hi {
        for m2 in 1..=hi {
            for n1 in 1..=hi {
                for n2 in 1..=hi {
                    let c = canonicalize(m1, m2, n1, n2).unwrap();
                    if seen.insert(c.counts()) {
                        out.push(AntennaConfig { swapped: false, ..c });
                    }
                }
            }
        }
    }
    out
}

fn r_limit(c: &AntennaConfig) -> usize {
    2 * c.m1.max(c.n1) * c.m2.max(c.n2) + 5
}

/// Plain enumeration of the elimination problem, written from the problem
/// statement: caps, unit costs and four-term objective per case.
fn brute_force(c: &AntennaConfig, r: usize, case: CaseLabel) -> usize {
    let (m1, m2, n1, n2) = c.counts();
    let (cap1, cap2, cost1, cost2) = match case {
        CaseLabel::Case1 => (n1, n2, m2, m1),
        CaseLabel::Case2_1 | CaseLabel::Case2_2 => (m2, n2, n1, m1),
        CaseLabel::Case3 => (m2, m1, n1, n2),
    };
    let mut best = 0;
    for f1 in 0..=cap1 {
        for f2 in 0..=cap2 {
            if f1 * cost1 + f2 * cost2 > r {
                continue;
            }
            let v = match case {
                CaseLabel::Case1 => [m2 + f1, m1 + f2, n1 + n2, m1 + m2],
                CaseLabel::Case2_1 | CaseLabel::Case2_2 => [n1 + f1, m1 + f2, m1 + m2, n1 + n2],
                CaseLabel::Case3 => [n1 + f1, n2 + f2, m1 + m2, n1 + n2],
            };
            best = best.max(*v.iter().min().unwrap());
        }
    }
    best
}

fn oracle_equivalence() -> Outcome {
    let mut checked = 0usize;
    for c in canonical_grid(10) {
        for case in classify_cases(&c).unwrap() {
            for r in 0..=r_limit(&c) {
                let got = case_sumdof(&c, RisConfig::new(r), case).unwrap();
                let want = brute_force(&c, r, case);
                if got != want {
                    return Err(format!("{c} {case} r={r}: closed form {got}, enumeration {want}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (config, case, r) triples"))
}

fn saturation() -> Outcome {
    for m in 1..=12usize {
        let cfg = AntennaConfig::symmetric(m, m).unwrap();
        for r in 0..=2 * m * m + 5 {
            let rep = achievable_sumdof(&cfg, RisConfig::new(r)).unwrap();
            if (rep.achievable == 2 * m) != (r >= 2 * m * m) {
                return Err(format!("M=N={m} r={r}: achievable {}", rep.achievable));
            }
            if r == 0 && rep.achievable != m {
                return Err(format!("M=N={m} r=0: achievable {} != {m}", rep.achievable));
            }
        }
    }
    for m in 1..=12usize {
        for n in 1..=12usize {
            let cfg = AntennaConfig::symmetric(m, n).unwrap();
            let r = 2 * m * n;
            let rep = achievable_sumdof(&cfg, RisConfig::new(r)).unwrap();
            if rep.achievable != 2 * m.min(n) {
                return Err(format!("M={m} N={n} r={r}: achievable {}", rep.achievable));
            }
        }
    }
    Ok("M = N in 1..=12, all r up to 2MN + 5".into())
}

fn figure_sweep() -> Outcome {
    let rs = [0usize, 40, 80, 200, 400];
    let rows = run_sweep(&SweepSpec::m_symmetric((1..=20).collect(), 10, rs.to_vec())).map_err(|e| e.to_string())?;
    let csv = to_csv_string(&rows).map_err(|e| e.to_string())?;
    let mut lines = csv.lines();
    if lines.next() != Some("m1,m2,n1,n2,r,case,achievable,baseline,gain,ris_helps") {
        return Err("unexpected CSV header".into());
    }
    let parsed: Vec<Vec<usize>> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            [0, 4, 6, 7].iter().map(|&i| f[i].parse().unwrap()).collect()
        })
        .collect();
    if parsed.len() != 20 * rs.len() {
        return Err(format!("{} rows", parsed.len()));
    }
    for (i, row) in parsed.chunks(rs.len()).enumerate() {
        let m = i + 1;
        let mut last = 0;
        for (k, v) in row.iter().enumerate() {
            let (mm, r, ach, base) = (v[0], v[1], v[2], v[3]);
            if mm != m || r != rs[k] {
                return Err(format!("row order broken at m={m}"));
            }
            if ach < last {
                return Err(format!("m={m}: sum-DoF drops at r={r}"));
            }
            last = ach;
            if r == 0 && ach != base {
                return Err(format!("m={m}: r=0 value {ach} differs from baseline {base}"));
            }
            if r >= 2 * m * 10 && ach != 2 * m.min(10) {
                return Err(format!("m={m} r={r}: {ach} != {}", 2 * m.min(10)));
            }
        }
    }
    Ok("M in 1..=20, N = 10, r in {0, 40, 80, 200, 400}".into())
}

fn symmetric_gain() -> Outcome {
    let mut checked = 0;
    for m in 1..=15usize {
        for n in 1..=15usize {
            let cfg = AntennaConfig::symmetric(m, n).unwrap();
            for r in 0..=2 * m * n + 5 {
                let rep = achievable_sumdof(&cfg, RisConfig::new(r)).unwrap();
                let diff = rep.achievable - rep.baseline;
                if ris_gain_symmetric(m, n, r) != diff {
                    return Err(format!("m={m} n={n} r={r}: closed form {} vs {diff}", ris_gain_symmetric(m, n, r)));
                }
                if (2 * n <= m || 2 * m <= n) && diff != 0 {
                    return Err(format!("m={m} n={n} r={r}: gain {diff} in the no-gain regime"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (m, n, r) points"))
}

fn help_condition() -> Outcome {
    let mut fired = 0usize;
    for c in canonical_grid(10) {
        for r in 0..=r_limit(&c) {
            let ris = RisConfig::new(r);
            if ris_help_condition(&c, ris) {
                fired += 1;
                let rep = achievable_sumdof(&c, ris).unwrap();
                if rep.gain < 1 {
                    return Err(format!("{c} r={r}: condition holds but gain is 0"));
                }
            }
        }
    }
    Ok(format!("condition held at {fired} points, gain >= 1 at all of them"))
}

fn cancellation() -> Outcome {
    let configs: [(usize, usize, usize, usize, usize); 24] = [
        (6, 4, 3, 3, 8),
        (5, 3, 3, 4, 10),
        (4, 4, 3, 3, 12),
        (7, 5, 4, 3, 20),
        (8, 6, 6, 5, 30),
        (6, 6, 4, 4, 40),
        (5, 3, 3, 3, 10),
        (6, 3, 3, 5, 15),
        (7, 4, 4, 6, 24),
        (9, 5, 5, 4, 33),
        (5, 2, 4, 4, 12),
        (8, 4, 6, 7, 40),
        (4, 3, 5, 2, 9),
        (4, 2, 6, 3, 14),
        (5, 4, 7, 4, 30),
        (3, 2, 4, 3, 9),
        (6, 5, 8, 6, 50),
        (3, 3, 5, 4, 12),
        (2, 3, 6, 4, 16),
        (4, 4, 7, 5, 26),
        (3, 2, 5, 3, 12),
        (5, 5, 9, 6, 48),
        (4, 4, 4, 4, 20),
        (10, 10, 10, 10, 200),
    ];
    let mut labels = BTreeSet::new();
    let mut instances = 0;
    for &(m1, m2, n1, n2, r) in &configs {
        let c = AntennaConfig::new(m1, m2, n1, n2).unwrap();
        let ris = RisConfig::new(r);
        for case in classify_cases(&c).map_err(|e| e.to_string())? {
            labels.insert(case);
            for seed in 0..10u64 {
                let syn = synthesize(&c, ris, case, seed).map_err(|e| format!("{c} {case} seed {seed}: {e}"))?;
                let ch = &syn.channels;
                let eff = &syn.effective;
                let plan = eff.plan;
                let bound = 1e-9 * (1.0 + syn.psi.rhs_norm);
                if syn.psi.residual > bound {
                    return Err(format!("{c} {case} seed {seed}: residual {:e}", syn.psi.residual));
                }
                // recompute the effective cross links straight from the draws
                let diag = ris_dof::linalg::CMat::from_diagonal(&syn.psi.psi);
                let h21 = &ch.h21 + &ch.g1 * &diag * &ch.d2;
                let h12 = &ch.h12 + &ch.g2 * &diag * &ch.d1;
                let z21 = match plan.mode1 {
                    ris_dof::dof::EliminationMode::Row => h21.rows(0, plan.f1).iter().map(|z| z.norm()).fold(0.0, f64::max),
                    ris_dof::dof::EliminationMode::Column => h21.columns(0, plan.f1).iter().map(|z| z.norm()).fold(0.0, f64::max),
                };
                let z12 = match plan.mode2 {
                    ris_dof::dof::EliminationMode::Row => h12.rows(0, plan.f2).iter().map(|z| z.norm()).fold(0.0, f64::max),
                    ris_dof::dof::EliminationMode::Column => h12.columns(0, plan.f2).iter().map(|z| z.norm()).fold(0.0, f64::max),
                };
                if z21 > 1e-9 * (1.0 + ch.h21.norm()) || z12 > 1e-9 * (1.0 + ch.h12.norm()) {
                    return Err(format!("{c} {case} seed {seed}: zero blocks {z21:e} / {z12:e}"));
                }
                let want21 = match plan.mode1 {
                    ris_dof::dof::EliminationMode::Row => n1 - plan.f1,
                    ris_dof::dof::EliminationMode::Column => m2 - plan.f1,
                };
                let want12 = match plan.mode2 {
                    ris_dof::dof::EliminationMode::Row => n2 - plan.f2,
                    ris_dof::dof::EliminationMode::Column => m1 - plan.f2,
                };
                if (eff.rank21(), eff.rank12()) != (want21, want12) {
                    return Err(format!(
                        "{c} {case} seed {seed}: ranks ({}, {}) expected ({want21}, {want12})",
                        eff.rank21(),
                        eff.rank12()
                    ));
                }
                instances += 1;
            }
        }
    }
    if labels.len() != 4 {
        return Err(format!("only {} case labels covered", labels.len()));
    }
    if instances < 200 {
        return Err(format!("only {instances} instances"));
    }
    Ok(format!("{instances} instances, {} configurations, all four cases", configs.len()))
}

fn slope() -> Outcome {
    let samples: [(usize, usize, usize, usize, usize); 12] = [
        (10, 10, 10, 10, 200),
        (6, 4, 3, 3, 8),
        (6, 4, 3, 3, 0),
        (4, 3, 5, 2, 9),
        (3, 3, 5, 4, 12),
        (3, 3, 5, 4, 4),
        (5, 3, 3, 3, 10),
        (4, 4, 4, 4, 20),
        (8, 6, 6, 5, 30),
        (7, 4, 4, 6, 24),
        (2, 3, 6, 4, 16),
        (6, 6, 8, 8, 60),
    ];
    let mut worst: f64 = 0.0;
    let mut labels = BTreeSet::new();
    for &(m1, m2, n1, n2, r) in &samples {
        let c = canonicalize(m1 as i64, m2 as i64, n1 as i64, n2 as i64).unwrap();
        let ris = RisConfig::new(r);
        let rep = achievable_sumdof(&c, ris).unwrap();
        let best = rep.best();
        labels.insert(best.case);
        let s = estimate_slope(&c, ris, best.case, 11, 80.0, 120.0).map_err(|e| format!("{c} r={r}: {e}"))?;
        let err = (s - rep.achievable as f64).abs();
        worst = worst.max(err);
        if err > 0.15 {
            return Err(format!("{c} r={r}: slope {s:.4} vs {}", rep.achievable));
        }
    }
    if !labels.contains(&CaseLabel::Case2_2) || !labels.contains(&CaseLabel::Case3) {
        return Err("sample lacks a Case2_2 or Case3 instance".into());
    }
    Ok(format!("{} configurations, worst deviation {worst:.4}", samples.len()))
}

fn subcase_collapse() -> Outcome {
    let mut checked = 0usize;
    for c in canonical_grid(10) {
        for case in classify_cases(&c).unwrap() {
            let space = search_space(&c, RisConfig::new(r_limit(&c)), case);
            let objective = per_case_objective(&c, case);
            for (f1, f2) in space.feasible_points() {
                let deep = subcase_sumdof(&c, case, f1, f2);
                if deep != objective(f1, f2) {
                    return Err(format!("{c} {case} f=({f1}, {f2}): sub-cases {deep}, min-form {}", objective(f1, f2)));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} feasible (config, case, f1, f2) points"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 saturation", saturation),
        ("3 M-sweep curves", figure_sweep),
        ("4 symmetric gain", symmetric_gain),
        ("5 help condition sufficiency", help_condition),
        ("6 numerical cancellation", cancellation),
        ("7 end-to-end slope", slope),
        ("8 sub-case collapse", subcase_collapse),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
