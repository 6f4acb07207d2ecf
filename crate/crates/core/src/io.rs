//! JSON formats for operators and Pauli coefficients.
//!
//! Operator files: `{"n": 2, "re": [[..], ..], "im": [[..], ..]}` with
//! row-major `2^n x 2^n` arrays. Pauli files:
//! `{"n": 2, "coeffs": [{"s": "03", "re": 0.5, "im": 0.0}, ..]}`.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{check_qubits, pauli_transform, DenseOperator, PauliCoefficients, C64};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorFile {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn check_rows(part: &str, rows: &[Vec<f64>], dim: usize) -> Result<()> {
    if rows.len() != dim {
        return Err(Error::Format(format!(
            "`{part}` has {} rows, expected {dim}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::Format(format!(
                "`{part}` row {i} has {} entries, expected {dim}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("`{part}`[{i}][{j}] is not finite")));
        }
    }
    Ok(())
}

/// Parses an operator from JSON text.
pub fn operator_from_json(text: &str) -> Result<DenseOperator> {
    let file: OperatorFile = serde_json::from_str(text)?;
    check_qubits(file.n)?;
    let dim = 1usize << file.n;
    check_rows("re", &file.re, dim)?;
    check_rows("im", &file.im, dim)?;
    DenseOperator::new(
        file.n,
        DMatrix::from_fn(dim, dim, |r, c| C64::new(file.re[r][c], file.im[r][c])),
    )
}

pub fn operator_to_json(x: &DenseOperator) -> Result<String> {
    let m = x.matrix();
    let part = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
        (0..x.dim())
            .map(|r| (0..x.dim()).map(|c| f(&m[(r, c)])).collect())
            .collect()
    };
    let file = OperatorFile {
        n: x.n(),
        re: part(|z| z.re),
        im: part(|z| z.im),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn read_operator(path: &Path) -> Result<DenseOperator> {
    operator_from_json(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PauliEntry {
    s: String,
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PauliFile {
    n: usize,
    coeffs: Vec<PauliEntry>,
}

/// Coefficients with magnitude above `threshold`, in multi-index order.
pub fn pauli_to_json(c: &PauliCoefficients, threshold: f64) -> Result<String> {
    let coeffs = c
        .iter()
        .filter(|(_, z)| z.norm() > threshold)
        .map(|(s, z)| PauliEntry {
            s: s.to_string(),
            re: z.re,
            im: z.im,
        })
        .collect();
    Ok(serde_json::to_string(&PauliFile { n: c.n(), coeffs })?)
}

/// Pauli expansion of an operator with the default relative threshold.
pub fn operator_pauli_json(x: &DenseOperator) -> Result<String> {
    let c = pauli_transform(x);
    let threshold = c.default_threshold();
    pauli_to_json(&c, threshold)
}

/// Parses a Pauli file; unlisted coefficients are zero.
pub fn pauli_from_json(text: &str) -> Result<PauliCoefficients> {
    let file: PauliFile = serde_json::from_str(text)?;
    let mut c = PauliCoefficients::zeros(file.n)?;
    for (k, e) in file.coeffs.iter().enumerate() {
        let s: crate::operator::MultiIndex = e.s.parse()?;
        if s.len() != file.n {
            return Err(Error::Format(format!(
                "coefficient {k}: `{}` has {} qubits, expected {}",
                e.s,
                s.len(),
                file.n
            )));
        }
        c.set(&s, C64::new(e.re, e.im));
    }
    Ok(c)
}
