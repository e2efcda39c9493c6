//! Matrix file formats.
//!
//! JSON: `{"rows": R, "cols": C, "data": [[re, im], ...]}`, row-major.
//! CSV: one matrix row per line, comma-separated complex tokens such as
//! `1.5`, `-2j`, `0.5+1e-3j` or `3-4j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        let data = j.data.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        ComplexMatrix::from_vec(j.rows, j.cols, data)
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("matrix serializes")
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let j: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    ComplexMatrix::try_from(j)
}

fn format_complex(z: Complex64) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{:e}-{:e}j", z.re, -z.im)
    } else {
        format!("{:e}+{:e}j", z.re, z.im)
    }
}

pub fn matrix_to_csv(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format_complex(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses `re`, `imj`, `re+imj` or `re-imj`.
fn parse_complex(tok: &str) -> Option<Complex64> {
    let t = tok.trim();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix(['j', 'i']) else {
        return t.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // Split at the last sign that is not the leading sign or part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re: f64 = body[..i].parse().ok()?;
            let im_txt = &body[i..];
            let im: f64 = match im_txt {
                "+" => 1.0,
                "-" => -1.0,
                s => s.parse().ok()?,
            };
            Some(Complex64::new(re, im))
        }
        None => {
            let im: f64 = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                s => s.parse().ok()?,
            };
            Some(Complex64::new(0.0, im))
        }
    }
}

pub fn matrix_from_csv(text: &str) -> Result<ComplexMatrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (li, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut count = 0;
        let mut col_pos = 1;
        for tok in line.split(',') {
            let z = parse_complex(tok).ok_or_else(|| Error::Parse {
                line: li + 1,
                column: col_pos,
                message: format!("'{}' is not a complex number", tok.trim()),
            })?;
            data.push(z);
            count += 1;
            col_pos += tok.len() + 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(Error::Parse {
                    line: li + 1,
                    column: 1,
                    message: format!("row has {count} entries, expected {c}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }
    ComplexMatrix::from_vec(rows, cols.unwrap_or(0), data)
}
