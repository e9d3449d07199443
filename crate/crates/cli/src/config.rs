//! `--config` file loading and value-list parsing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

/// Either a single number or a list/range expression such as `0..60:20`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Values {
    One(i64),
    Many(Vec<i64>),
    Expr(String),
}

impl Values {
    pub fn render(&self) -> String {
        match self {
            Values::One(v) => v.to_string(),
            Values::Many(vs) => vs.iter().map(i64::to_string).collect::<Vec<_>>().join(","),
            Values::Expr(s) => s.clone(),
        }
    }
}

/// Same field names as the command-line flags; every field optional.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub m1: Option<i64>,
    pub m2: Option<i64>,
    pub n1: Option<i64>,
    pub n2: Option<i64>,
    pub m: Option<Values>,
    pub n: Option<i64>,
    pub r: Option<Values>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub snr_lo: Option<f64>,
    pub snr_hi: Option<f64>,
    pub variable: Option<String>,
    pub json: Option<bool>,
    pub out: Option<PathBuf>,
}

pub fn load(path: Option<&Path>) -> Result<ConfigFile, String> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

/// Parses `7`, `1,2,5`, `1..20` (inclusive) or `0..400:40` into values.
pub fn parse_values(text: &str) -> Result<Vec<usize>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty value list".into());
    }
    let number = |s: &str| -> Result<usize, String> {
        let v: i64 = s.trim().parse().map_err(|_| format!("'{s}' is not an integer"))?;
        usize::try_from(v).map_err(|_| format!("negative value {v}"))
    };
    if let Some((lo, rest)) = text.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (hi, number(step)?),
            None => (rest, 1),
        };
        let (lo, hi) = (number(lo)?, number(hi)?);
        if step == 0 {
            return Err("range step must be positive".into());
        }
        if hi < lo {
            return Err(format!("empty range {lo}..{hi}"));
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    text.split(',').map(number).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("7").unwrap(), vec![7]);
        assert_eq!(parse_values("0,40, 80").unwrap(), vec![0, 40, 80]);
        assert_eq!(parse_values("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_values("0..60:20").unwrap(), vec![0, 20, 40, 60]);
        assert!(parse_values("-1").is_err());
        assert!(parse_values("5..1").is_err());
        assert!(parse_values("0..4:0").is_err());
        assert!(parse_values("").is_err());
    }

    #[test]
    fn config_fields() {
        let c: ConfigFile = serde_json::from_str(r#"{"m1": 6, "r": "0..8:4", "m": [1, 2], "tol": 1e-9}"#).unwrap();
        assert_eq!(c.m1, Some(6));
        assert_eq!(c.r.unwrap().render(), "0..8:4");
        assert_eq!(c.m.unwrap().render(), "1,2");
        assert!(serde_json::from_str::<ConfigFile>(r#"{"bogus": 1}"#).is_err());
    }
}
