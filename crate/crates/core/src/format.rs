//! JSON process files and deconvolution reports.
//!
//! ```json
//! {
//!   "labels": ["a", "b"],
//!   "weights": ["1", "1/2"],
//!   "max_order": 2,
//!   "p0": "1/4",
//!   "densities": { "a": "1/2", "a,b": "1/8" },
//!   "mode": "rational",
//!   "tail_mass_allowed": false
//! }
//! ```
//!
//! Rational-mode values are written as strings `"p/q"` (or `"p"`); float-mode
//! values as JSON numbers in shortest round-trip form. On input both modes
//! accept numbers and rational strings. Density keys are comma-joined labels
//! in any order; they are written sorted by state index.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::combinatorics::Multiset;
use crate::deconvolution::DeconvolutionReport;
use crate::error::{Error, Result};
use crate::process::{JanossyProcess, StateSpace};
use crate::scalar::{format_rational, parse_rational, NumericMode, Rational, Scalar};

/// Scalars with a JSON encoding.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Result<Value>;
    fn from_json(value: &Value) -> Result<Self>;
}

fn value_as_rational(value: &Value) -> Result<Rational> {
    let text = match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => {
            return Err(Error::Parse(format!(
                "expected a number or rational string, got {other}"
            )))
        }
    };
    parse_rational(&text).ok_or_else(|| Error::Parse(format!("invalid number `{text}`")))
}

impl JsonScalar for Rational {
    fn to_json(&self) -> Result<Value> {
        Ok(Value::String(format_rational(self)))
    }

    fn from_json(value: &Value) -> Result<Self> {
        value_as_rational(value)
    }
}

impl JsonScalar for f64 {
    fn to_json(&self) -> Result<Value> {
        Number::from_f64(*self)
            .map(Value::Number)
            .ok_or_else(|| Error::Parse(format!("non-finite value {self}")))
    }

    fn from_json(value: &Value) -> Result<Self> {
        match value {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("number {n} out of range"))),
            _ => value_as_rational(value).map(|r| Scalar::to_f64(&r)),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessFile {
    labels: Vec<String>,
    weights: Vec<Value>,
    max_order: usize,
    p0: Value,
    densities: BTreeMap<String, Value>,
    mode: NumericMode,
    #[serde(default)]
    tail_mass_allowed: bool,
}

/// A process of either numeric mode, as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyProcess {
    Rational(JanossyProcess<Rational>),
    Float(JanossyProcess<f64>),
}

impl AnyProcess {
    pub fn mode(&self) -> NumericMode {
        match self {
            AnyProcess::Rational(_) => NumericMode::Rational,
            AnyProcess::Float(_) => NumericMode::Float,
        }
    }

    pub fn max_order(&self) -> usize {
        match self {
            AnyProcess::Rational(p) => p.max_order(),
            AnyProcess::Float(p) => p.max_order(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        match self {
            AnyProcess::Rational(p) => process_to_json(p),
            AnyProcess::Float(p) => process_to_json(p),
        }
    }
}

/// Comma-joined labels of a multiset, e.g. `"a,a,b"`.
pub fn density_key<S: Scalar>(space: &StateSpace<S>, key: &Multiset) -> String {
    key.expand()
        .iter()
        .map(|&i| space.labels()[i].as_str())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_key<S: Scalar>(space: &StateSpace<S>, key: &str) -> Result<Multiset> {
    if key.is_empty() {
        return Err(Error::Parse(
            "empty density key (use p0 for the empty configuration)".into(),
        ));
    }
    let points = key
        .split(',')
        .map(|l| {
            space
                .index_of(l.trim())
                .ok_or_else(|| Error::Parse(format!("unknown label `{l}` in key `{key}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Multiset::from_points(&points))
}

fn build<S: JsonScalar>(file: &ProcessFile) -> Result<JanossyProcess<S>> {
    let weights = file
        .weights
        .iter()
        .map(S::from_json)
        .collect::<Result<Vec<_>>>()?;
    let space =
        StateSpace::new(file.labels.clone(), weights).map_err(|e| Error::Parse(e.to_string()))?;
    let mut process = JanossyProcess::new(space, file.max_order, S::from_json(&file.p0)?);
    process.set_tail_mass_allowed(file.tail_mass_allowed);
    let mut seen = std::collections::BTreeSet::new();
    for (key, value) in &file.densities {
        let m = parse_key(process.space(), key)?;
        if !seen.insert(m.clone()) {
            return Err(Error::Parse(format!("duplicate density key `{key}`")));
        }
        if m.size() > file.max_order {
            return Err(Error::Parse(format!(
                "key `{key}` has {} points but max_order is {}",
                m.size(),
                file.max_order
            )));
        }
        process.set_density(m, S::from_json(value)?)?;
    }
    Ok(process)
}

pub fn parse_process(text: &str) -> Result<AnyProcess> {
    let file: ProcessFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(match file.mode {
        NumericMode::Rational => AnyProcess::Rational(build(&file)?),
        NumericMode::Float => AnyProcess::Float(build(&file)?),
    })
}

/// Pretty JSON with sorted density keys and a trailing newline.
pub fn process_to_json<S: JsonScalar>(process: &JanossyProcess<S>) -> Result<String> {
    let space = process.space();
    let mut densities = BTreeMap::new();
    for (key, value) in process.densities() {
        densities.insert(density_key(space, key), value.to_json()?);
    }
    let file = ProcessFile {
        labels: space.labels().to_vec(),
        weights: space
            .weights()
            .iter()
            .map(JsonScalar::to_json)
            .collect::<Result<_>>()?,
        max_order: process.max_order(),
        p0: process.p0().to_json()?,
        densities,
        mode: S::MODE,
        tail_mass_allowed: process.tail_mass_allowed(),
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[derive(Serialize)]
struct ReportFile {
    min_density: Value,
    negative_count: usize,
    term_count: u64,
    mass: Value,
    valid_process: bool,
}

pub fn report_to_json<S: JsonScalar>(report: &DeconvolutionReport<S>) -> Result<String> {
    let file = ReportFile {
        min_density: report.min_density.to_json()?,
        negative_count: report.negative_count,
        term_count: report.term_count,
        mass: report.mass.to_json()?,
        valid_process: report.valid_process,
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    Ok(text)
}
