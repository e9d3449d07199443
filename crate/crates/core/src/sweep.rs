//! Parameter sweeps over the closed-form sum-DoF.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dof::{achievable_sumdof, ris_gain_symmetric};
use crate::model::{canonicalize, AntennaConfig, ModelError, RisConfig};

pub const CSV_HEADER: [&str; 10] = [
    "m1", "m2", "n1", "n2", "r", "case", "achievable", "baseline", "gain", "ris_helps",
];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0} list is empty")]
    EmptyRange(&'static str),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// `(m1, m2, n1, n2, r)`.
pub type GridPoint = (usize, usize, usize, usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    /// `m1 = m2 = m` runs over `m_values`, rows grouped by `m`.
    MSymmetric,
    /// Fixed antennas, rows ordered by `r`.
    R,
}

/// Grid of configurations to evaluate.
///
/// With [`SweepVariable::MSymmetric`] the transmit counts of `base` are
/// replaced by each entry of `m_values`; otherwise `base` is used as is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub base: (usize, usize, usize, usize),
    pub m_values: Vec<usize>,
    pub r_values: Vec<usize>,
}

impl SweepSpec {
    pub fn m_symmetric(m_values: Vec<usize>, n: usize, r_values: Vec<usize>) -> Self {
        SweepSpec { variable: SweepVariable::MSymmetric, base: (1, 1, n, n), m_values, r_values }
    }

    pub fn r_sweep(m1: usize, m2: usize, n1: usize, n2: usize, r_values: Vec<usize>) -> Self {
        SweepSpec { variable: SweepVariable::R, base: (m1, m2, n1, n2), m_values: Vec::new(), r_values }
    }

    /// Grid points in emission order.
    pub fn points(&self) -> Result<Vec<GridPoint>, SweepError> {
        if self.r_values.is_empty() {
            return Err(SweepError::EmptyRange("r"));
        }
        let (m1, m2, n1, n2) = self.base;
        let mut r_values = self.r_values.clone();
        r_values.sort_unstable();
        r_values.dedup();
        let out = match self.variable {
            SweepVariable::MSymmetric => {
                if self.m_values.is_empty() {
                    return Err(SweepError::EmptyRange("m"));
                }
                let mut ms = self.m_values.clone();
                ms.sort_unstable();
                ms.dedup();
                ms.iter()
                    .flat_map(|&m| r_values.iter().map(move |&r| (m, m, n1, n2, r)))
                    .collect()
            }
            SweepVariable::R => r_values.iter().map(|&r| (m1, m2, n1, n2, r)).collect(),
        };
        Ok(out)
    }
}

/// One CSV line. Antenna counts are reported as given, before relabeling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m1: usize,
    pub m2: usize,
    pub n1: usize,
    pub n2: usize,
    pub r: usize,
    pub case: String,
    pub achievable: usize,
    pub baseline: usize,
    pub gain: usize,
    pub ris_helps: bool,
}

fn row(m1: usize, m2: usize, n1: usize, n2: usize, r: usize) -> Result<SweepRow, SweepError> {
    let cfg: AntennaConfig = canonicalize(m1 as i64, m2 as i64, n1 as i64, n2 as i64)?;
    let report = achievable_sumdof(&cfg, RisConfig::new(r))?;
    Ok(SweepRow {
        m1,
        m2,
        n1,
        n2,
        r,
        case: report.best().case.name().to_string(),
        achievable: report.achievable,
        baseline: report.baseline,
        gain: report.gain,
        ris_helps: report.ris_helps,
    })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    spec.points()?
        .into_iter()
        .map(|(m1, m2, n1, n2, r)| row(m1, m2, n1, n2, r))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), SweepError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn to_csv_string(rows: &[SweepRow]) -> Result<String, SweepError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

/// Closed-form symmetric gain next to the table-minus-baseline value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GainRow {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub closed_form: usize,
    pub from_table: usize,
}

impl GainRow {
    pub fn matches(&self) -> bool {
        self.closed_form == self.from_table
    }
}

pub fn gain_table(m: usize, n: usize, r_values: &[usize]) -> Result<Vec<GainRow>, SweepError> {
    if r_values.is_empty() {
        return Err(SweepError::EmptyRange("r"));
    }
    let cfg = AntennaConfig::symmetric(m, n)?;
    r_values
        .iter()
        .map(|&r| {
            let report = achievable_sumdof(&cfg, RisConfig::new(r))?;
            Ok(GainRow { m, n, r, closed_form: ris_gain_symmetric(m, n, r), from_table: report.gain })
        })
        .collect()
}
