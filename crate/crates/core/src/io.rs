//! JSON file formats for codes, read plans and matrices.
//!
//! Entries are stored as signed integers and reduced mod `p` on load, so
//! hand-written files may use small negative values.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::{CodeParams, ConvertiblePair, ModelError};
use crate::conversion::{ConversionError, ReadPlan};
use crate::ff_linalg::{LinalgError, Matrix, PrimeField};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, IoError>;

/// A convertible pair on disk. `B` is `kI*ell x rI*ell`, `C` is `kF*ell x rF*ell`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeFile {
    pub p: u64,
    pub ell: usize,
    pub lambda: usize,
    #[serde(rename = "kF")]
    pub k_f: usize,
    #[serde(rename = "rF")]
    pub r_f: usize,
    #[serde(rename = "rI")]
    pub r_i: usize,
    #[serde(rename = "B")]
    pub b: Vec<Vec<i64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<i64>>,
}

/// A read plan on disk: `D[j]` lists the 0-based subsymbols read from symbol `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFile {
    #[serde(rename = "D")]
    pub d: Vec<Vec<usize>>,
}

/// A matrix over `F_p` on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub p: u64,
    #[serde(rename = "M")]
    pub m: Vec<Vec<i64>>,
}

fn rect(rows: &[Vec<i64>], want_rows: usize, want_cols: usize, name: &str) -> Result<()> {
    if rows.len() != want_rows || rows.iter().any(|r| r.len() != want_cols) {
        return Err(IoError::Shape(format!(
            "{name} must be {want_rows} x {want_cols}"
        )));
    }
    Ok(())
}

fn residues(m: &Matrix) -> Vec<Vec<i64>> {
    m.to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(i64::from).collect())
        .collect()
}

impl CodeFile {
    pub fn params(&self) -> Result<CodeParams> {
        Ok(CodeParams::new(
            self.lambda,
            self.k_f,
            self.r_f,
            self.r_i,
            self.ell,
            self.p,
        )?)
    }

    /// Checks shapes and reduces every entry mod `p`.
    pub fn to_pair(&self) -> Result<ConvertiblePair> {
        let params = self.params()?;
        let ell = params.ell();
        rect(&self.b, params.k_i() * ell, params.r_i() * ell, "B")?;
        rect(&self.c, params.k_f() * ell, params.r_f() * ell, "C")?;
        let b = Matrix::from_signed_rows(params.field, &self.b)?;
        let c = Matrix::from_signed_rows(params.field, &self.c)?;
        Ok(ConvertiblePair::new(params, b, c)?)
    }

    /// Stores canonical residues in `0..p`.
    pub fn from_pair(pair: &ConvertiblePair) -> Self {
        let s = pair.params.split;
        Self {
            p: u64::from(pair.params.p()),
            ell: s.ell,
            lambda: s.lambda,
            k_f: s.k_f,
            r_f: s.r_f,
            r_i: s.r_i,
            b: residues(&pair.b),
            c: residues(&pair.c),
        }
    }
}

impl PlanFile {
    pub fn to_plan(&self, params: &CodeParams) -> Result<ReadPlan> {
        Ok(ReadPlan::new(params, self.d.clone())?)
    }

    pub fn from_plan(plan: &ReadPlan) -> Self {
        Self {
            d: plan.sets().to_vec(),
        }
    }
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<Matrix> {
        let field = PrimeField::new(self.p)?;
        let cols = self.m.first().map_or(0, Vec::len);
        rect(&self.m, self.m.len(), cols, "M")?;
        if self.m.is_empty() {
            return Ok(Matrix::zeros(field, 0, 0));
        }
        Ok(Matrix::from_signed_rows(field, &self.m)?)
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        Self {
            p: u64::from(m.field().modulus()),
            m: residues(m),
        }
    }
}

pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| IoError::Json {
        path: origin.to_string(),
        source,
    })
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    parse_json(&text, &path.display().to_string())
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("file types always serialize");
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}
