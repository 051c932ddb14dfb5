//! JSON formats for states, ensembles, Kraus sets, decompositions and search reports.
//!
//! Complex entries are `[re, im]` pairs; matrices are arrays of rows.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::decompose::{ProductTerm, SearchReport, SeparableDecomposition};
use crate::duality::KrausSet;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::Complex;
use crate::states::{DensityMatrix, Ensemble, EnsembleTerm};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub dim_a: usize,
    pub dim_b: usize,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub p: f64,
    pub c: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleJson {
    pub dim_a: usize,
    pub dim_b: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrausJson {
    pub dim_a: usize,
    pub dim_b: usize,
    pub ops: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductTermJson {
    pub q: f64,
    pub a: MatrixJson,
    pub b: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionJson {
    pub terms: Vec<ProductTermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReportJson {
    pub found: bool,
    pub residual: f64,
    pub restarts: usize,
    pub seed: u64,
    #[serde(rename = "V")]
    pub v: MatrixJson,
    pub source_terms: usize,
    pub target_terms: usize,
    pub best_restart: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decomposition: Option<DecompositionJson>,
}

/// A state or ensemble read from one input file.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    State(DensityMatrix<f64>),
    Ensemble(Ensemble<f64>),
}

impl Input {
    pub fn state(&self) -> DensityMatrix<f64> {
        match self {
            Input::State(s) => s.clone(),
            Input::Ensemble(e) => crate::states::to_density(e),
        }
    }
}

/// Deserializes `text`, reporting syntax and schema errors with line and column.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
}

pub fn matrix_to_json(m: &CMatrix<f64>) -> MatrixJson {
    (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != c) {
        return Err(Error::ShapeMismatch(format!("row {i} has {} entries, row 0 has {c}", row.len())));
    }
    let data = rows.iter().flatten().map(|&[re, im]| Complex::new(re, im)).collect();
    CMatrix::new(r, c, data)
}

pub fn state_to_json(rho: &DensityMatrix<f64>) -> StateJson {
    StateJson { dim_a: rho.dim_a(), dim_b: rho.dim_b(), matrix: matrix_to_json(rho.matrix()) }
}

pub fn state_from_json(s: &StateJson) -> Result<DensityMatrix<f64>> {
    DensityMatrix::new(s.dim_a, s.dim_b, matrix_from_json(&s.matrix)?)
}

pub fn ensemble_to_json(e: &Ensemble<f64>) -> EnsembleJson {
    EnsembleJson {
        dim_a: e.dim_a(),
        dim_b: e.dim_b(),
        terms: e.terms().iter().map(|t| TermJson { p: t.p, c: matrix_to_json(&t.c) }).collect(),
    }
}

pub fn ensemble_from_json(e: &EnsembleJson) -> Result<Ensemble<f64>> {
    let terms = e
        .terms
        .iter()
        .map(|t| Ok(EnsembleTerm { p: t.p, c: matrix_from_json(&t.c)? }))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(e.dim_a, e.dim_b, terms)
}

pub fn kraus_to_json(k: &KrausSet<f64>) -> KrausJson {
    KrausJson { dim_a: k.dim_a(), dim_b: k.dim_b(), ops: k.ops().iter().map(matrix_to_json).collect() }
}

pub fn kraus_from_json(k: &KrausJson) -> Result<KrausSet<f64>> {
    let ops = k.ops.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
    KrausSet::new(k.dim_a, k.dim_b, ops)
}

pub fn decomposition_to_json(d: &SeparableDecomposition<f64>) -> DecompositionJson {
    DecompositionJson {
        terms: d
            .terms
            .iter()
            .map(|t| ProductTermJson { q: t.q, a: matrix_to_json(&t.a), b: matrix_to_json(&t.b) })
            .collect(),
    }
}

pub fn decomposition_from_json(d: &DecompositionJson) -> Result<SeparableDecomposition<f64>> {
    let terms = d
        .terms
        .iter()
        .map(|t| Ok(ProductTerm { q: t.q, a: matrix_from_json(&t.a)?, b: matrix_from_json(&t.b)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparableDecomposition::new(terms))
}

pub fn search_report_to_json(r: &SearchReport) -> SearchReportJson {
    SearchReportJson {
        found: r.found(),
        residual: r.residual,
        restarts: r.restarts,
        seed: r.seed,
        v: matrix_to_json(r.v.matrix()),
        source_terms: r.source_terms,
        target_terms: r.target_terms,
        best_restart: r.best_restart,
        decomposition: r.decomposition().map(decomposition_to_json),
    }
}

/// Reads a state file (`matrix` key) or an ensemble file (`terms` key).
pub fn parse_input(text: &str) -> Result<Input> {
    let value: Value = parse(text)?;
    let obj = value.as_object().ok_or_else(|| Error::Parse("top level must be a JSON object".into()))?;
    if obj.contains_key("matrix") {
        Ok(Input::State(state_from_json(&parse(text)?)?))
    } else if obj.contains_key("terms") {
        Ok(Input::Ensemble(ensemble_from_json(&parse(text)?)?))
    } else {
        Err(Error::Parse("expected a state (\"matrix\") or an ensemble (\"terms\")".into()))
    }
}
