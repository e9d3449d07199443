//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Each export returns a JSON string; the plain `*_json` functions hold the
//! logic so they can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ris_dof::dof::achievable_sumdof;
use ris_dof::linalg::CMat;
use ris_dof::model::{canonicalize, AntennaConfig, RisConfig};
use ris_dof::transceiver::run_scheme;

fn config(m1: i32, m2: i32, n1: i32, n2: i32) -> Result<AntennaConfig, String> {
    canonicalize(m1 as i64, m2 as i64, n1 as i64, n2 as i64).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn report_json(m1: i32, m2: i32, n1: i32, n2: i32, r: i32) -> Result<String, String> {
    let cfg = config(m1, m2, n1, n2)?;
    let r = usize::try_from(r).map_err(|_| format!("r must be non-negative (got {r})"))?;
    let report = achievable_sumdof(&cfg, RisConfig::new(r)).map_err(|e| e.to_string())?;
    to_json(&report)
}

#[derive(Serialize)]
struct CurvePoint {
    r: usize,
    achievable: usize,
    baseline: usize,
    case: &'static str,
}

/// Sum-DoF against RIS size for `r = 0, step, 2*step, ..., r_max`.
pub fn curve_json(m1: i32, m2: i32, n1: i32, n2: i32, r_max: i32, step: i32) -> Result<String, String> {
    let cfg = config(m1, m2, n1, n2)?;
    if r_max < 0 || step < 1 {
        return Err("need r_max >= 0 and step >= 1".into());
    }
    let points = (0..=r_max as usize)
        .step_by(step as usize)
        .map(|r| {
            let rep = achievable_sumdof(&cfg, RisConfig::new(r)).map_err(|e| e.to_string())?;
            Ok(CurvePoint { r, achievable: rep.achievable, baseline: rep.baseline, case: rep.best().case.name() })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&points)
}

#[derive(Serialize)]
struct Heatmap {
    case: &'static str,
    f1: usize,
    f2: usize,
    streams: usize,
    slope: f64,
    max_psi: f64,
    /// `log10 |entry|` of each effective link, row-major.
    hbar11: Vec<Vec<f64>>,
    hbar21: Vec<Vec<f64>>,
    hbar12: Vec<Vec<f64>>,
    hbar22: Vec<Vec<f64>>,
}

fn log_magnitudes(m: &CMat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm().max(1e-18).log10()).collect())
        .collect()
}

/// Synthesizes one seeded instance and reports the effective channel magnitudes.
pub fn instance_json(m1: i32, m2: i32, n1: i32, n2: i32, r: i32, seed: u32) -> Result<String, String> {
    let cfg = config(m1, m2, n1, n2)?;
    let r = usize::try_from(r).map_err(|_| format!("r must be non-negative (got {r})"))?;
    if cfg.m1.max(cfg.m2).max(cfg.n1).max(cfg.n2) > 16 || r > 1024 {
        return Err("demo limited to 16 antennas and 1024 elements".into());
    }
    let ris = RisConfig::new(r);
    let report = achievable_sumdof(&cfg, ris).map_err(|e| e.to_string())?;
    let case = report.best().case;
    let run = run_scheme(&cfg, ris, case, seed as u64).map_err(|e| e.to_string())?;
    let eff = &run.synthesis.effective;
    to_json(&Heatmap {
        case: case.name(),
        f1: eff.plan.f1,
        f2: eff.plan.f2,
        streams: run.alloc.total,
        slope: run.slope(80.0, 120.0),
        max_psi: run.synthesis.psi.max_magnitude,
        hbar11: log_magnitudes(&eff.hbar11),
        hbar21: log_magnitudes(&eff.hbar21),
        hbar12: log_magnitudes(&eff.hbar12),
        hbar22: log_magnitudes(&eff.hbar22),
    })
}

#[wasm_bindgen]
pub fn report(m1: i32, m2: i32, n1: i32, n2: i32, r: i32) -> Result<String, JsValue> {
    report_json(m1, m2, n1, n2, r).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn curve(m1: i32, m2: i32, n1: i32, n2: i32, r_max: i32, step: i32) -> Result<String, JsValue> {
    curve_json(m1, m2, n1, n2, r_max, step).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn instance(m1: i32, m2: i32, n1: i32, n2: i32, r: i32, seed: u32) -> Result<String, JsValue> {
    instance_json(m1, m2, n1, n2, r, seed).map_err(|e| JsValue::from_str(&e))
}
