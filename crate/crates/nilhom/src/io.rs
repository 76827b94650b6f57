//! JSON input schema for algebras and operators.
//!
//! ```json
//! {"name": "heisenberg", "dimension": 3,
//!  "brackets": [{"i": 1, "j": 2, "terms": [{"k": 3, "coeff": "1/1"}]}],
//!  "derivation": [[1, 0, 0], [0, 1, 0], [0, 0, 2]]}
//! ```
//!
//! Basis indices are 1-based. Coefficients are exact: integers or `"p/q"`
//! strings. Matrix entries are numbers or `"p/q"` strings, row-major.

use std::fs;
use std::path::{Path, PathBuf};

use nilhom_core::algebra::{AlgebraError, LieAlgebra};
use nilhom_core::matrix::RealMatrix;
use nilhom_core::scalar::{Rational, Scalar};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON in {origin}: {source}")]
    Json {
        origin: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{origin}: {message}")]
    Schema { origin: String, message: String },
    #[error("{origin}: {source}")]
    Algebra {
        origin: String,
        #[source]
        source: AlgebraError,
    },
}

/// A rational given as an integer or as a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Integer(i64),
    Text(String),
}

impl Coefficient {
    pub fn to_rational(&self) -> Result<Rational, String> {
        match self {
            Coefficient::Integer(v) => Ok(Rational::from_i64(*v)),
            Coefficient::Text(s) => s.trim().parse::<Rational>().map_err(|_| format!("not a rational: {s:?}")),
        }
    }
}

impl From<&Rational> for Coefficient {
    fn from(q: &Rational) -> Self {
        Coefficient::Text(format!("{}/{}", q.numer(), q.denom()))
    }
}

/// A matrix entry: any JSON number or a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Text(String),
}

impl Entry {
    fn to_f64(&self) -> Result<f64, String> {
        match self {
            Entry::Number(v) => Ok(*v),
            Entry::Text(s) => s
                .trim()
                .parse::<Rational>()
                .map(|q| q.to_f64())
                .or_else(|_| s.trim().parse::<f64>())
                .map_err(|_| format!("not a number: {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub k: usize,
    pub coeff: Coefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketSpec {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub name: String,
    pub dimension: usize,
    #[serde(default)]
    pub brackets: Vec<BracketSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivation: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automorphism: Option<Vec<Vec<Entry>>>,
    /// Dilation factor of `automorphism`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

/// A validated input file.
#[derive(Debug, Clone)]
pub struct Input {
    pub algebra: LieAlgebra,
    pub derivation: Option<RealMatrix>,
    pub automorphism: Option<RealMatrix>,
    pub lambda: Option<f64>,
}

fn schema(origin: &str, message: impl Into<String>) -> InputError {
    InputError::Schema { origin: origin.to_string(), message: message.into() }
}

fn matrix(origin: &str, what: &str, rows: &[Vec<Entry>], n: usize) -> Result<RealMatrix, InputError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(schema(origin, format!("{what} must be a {n}x{n} row-major array")));
    }
    let mut data = Vec::with_capacity(n * n);
    for (r, row) in rows.iter().enumerate() {
        for (c, e) in row.iter().enumerate() {
            data.push(e.to_f64().map_err(|m| schema(origin, format!("{what}[{}][{}]: {m}", r + 1, c + 1)))?);
        }
    }
    Ok(RealMatrix::from_row_slice(n, n, &data))
}

impl AlgebraSpec {
    pub fn validate(&self, origin: &str) -> Result<Input, InputError> {
        let n = self.dimension;
        let index = |what: &str, v: usize| {
            if (1..=n).contains(&v) {
                Ok(v - 1)
            } else {
                Err(schema(origin, format!("{what} = {v} outside 1..={n}")))
            }
        };
        let mut constants = Vec::new();
        for (b, br) in self.brackets.iter().enumerate() {
            let i = index(&format!("brackets[{b}].i"), br.i)?;
            let j = index(&format!("brackets[{b}].j"), br.j)?;
            for (t, term) in br.terms.iter().enumerate() {
                let k = index(&format!("brackets[{b}].terms[{t}].k"), term.k)?;
                let c =
                    term.coeff.to_rational().map_err(|m| schema(origin, format!("brackets[{b}].terms[{t}]: {m}")))?;
                constants.push((i, j, k, c));
            }
        }
        let algebra = LieAlgebra::new(self.name.clone(), n, constants)
            .map_err(|source| InputError::Algebra { origin: origin.to_string(), source })?;
        let derivation = self.derivation.as_deref().map(|m| matrix(origin, "derivation", m, n)).transpose()?;
        let automorphism = self.automorphism.as_deref().map(|m| matrix(origin, "automorphism", m, n)).transpose()?;
        Ok(Input { algebra, derivation, automorphism, lambda: self.lambda })
    }

    /// The schema form of an algebra, with optional operators.
    pub fn from_algebra(g: &LieAlgebra, derivation: Option<&RealMatrix>) -> Self {
        let mut brackets: Vec<BracketSpec> = Vec::new();
        for (i, j, k, c) in g.structure_constants() {
            let term = TermSpec { k: k + 1, coeff: Coefficient::from(c) };
            match brackets.iter_mut().find(|b| b.i == i + 1 && b.j == j + 1) {
                Some(b) => b.terms.push(term),
                None => brackets.push(BracketSpec { i: i + 1, j: j + 1, terms: vec![term] }),
            }
        }
        let rows =
            |m: &RealMatrix| m.to_rows().into_iter().map(|r| r.into_iter().map(Entry::Number).collect()).collect();
        AlgebraSpec {
            name: g.name().to_string(),
            dimension: g.dimension(),
            brackets,
            derivation: derivation.map(rows),
            automorphism: None,
            lambda: None,
        }
    }
}

pub fn parse_input(text: &str, origin: &str) -> Result<Input, InputError> {
    let spec: AlgebraSpec =
        serde_json::from_str(text).map_err(|source| InputError::Json { origin: origin.to_string(), source })?;
    spec.validate(origin)
}

pub fn read_input(path: &Path) -> Result<Input, InputError> {
    let text = fs::read_to_string(path).map_err(|source| InputError::Read { path: path.to_path_buf(), source })?;
    parse_input(&text, &path.display().to_string())
}

/// Point pairs `(p, q)` from CSV rows of `2n` numbers; `#` starts a comment.
pub fn read_pairs<R: std::io::Read>(
    reader: R,
    n: usize,
    origin: &str,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>, InputError> {
    let mut rdr =
        csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let mut pairs = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| schema(origin, e.to_string()))?;
        if record.len() != 2 * n {
            return Err(schema(origin, format!("row {}: expected {} values, found {}", line + 1, 2 * n, record.len())));
        }
        let values: Vec<f64> = record
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| schema(origin, format!("row {}: not a number: {s:?}", line + 1))))
            .collect::<Result<_, _>>()?;
        pairs.push((values[..n].to_vec(), values[n..].to_vec()));
    }
    Ok(pairs)
}
