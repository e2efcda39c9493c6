use std::fs;
use std::path::{Path, PathBuf};

use cnrange::coefficients::parse_coefficients;
use cnrange::linalg::{matrix_from_csv, matrix_from_json, random_unitary, ComplexMatrix};
use cnrange::preserver::RuleName;
use cnrange::{AmbientDim, CoefficientVector, OperatorModel};
use serde::Deserialize;

use crate::error::CliError;
use crate::OperatorArgs;

/// JSON when the first non-blank character is `{`, CSV otherwise.
pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let parsed = if text.trim_start().starts_with('{') { matrix_from_json(&text) } else { matrix_from_csv(&text) };
    parsed.map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn coefficients(text: &str) -> Result<CoefficientVector, CliError> {
    Ok(parse_coefficients(text)?)
}

pub struct Job {
    pub operator: OperatorModel,
    pub c: CoefficientVector,
    pub grid: usize,
}

pub fn load(args: &OperatorArgs) -> Result<Job, CliError> {
    let block = read_matrix(&args.matrix)?;
    if !block.is_square() {
        return Err(CliError::usage(format!("matrix is {}×{}, expected square", block.rows(), block.cols())));
    }
    let ambient = args.ambient.unwrap_or(AmbientDim::Finite(block.rows()));
    let c = coefficients(&args.c)?;
    if let AmbientDim::Finite(n) = ambient {
        if c.len() > n {
            return Err(CliError::usage(format!(
                "dimension error: {} weights exceed ambient dimension {n}; pass --ambient infinite or a larger finite:N",
                c.len()
            )));
        }
    }
    if args.grid < cnrange::range::MIN_GRID {
        return Err(CliError::usage(format!("--grid must be at least {}", cnrange::range::MIN_GRID)));
    }
    Ok(Job { operator: OperatorModel::new(block, ambient)?, c, grid: args.grid })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    CaseOne,
    CaseTwo,
    CaseThree,
    Hybrid,
    Transpose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    /// Seeded random pairs, a third of them rank one on one side.
    #[default]
    Random,
    /// `A = B = I_p ⊕ 0`.
    Projection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `W_c(Φ(A)Φ(B)) = W_c(AB)`.
    #[default]
    Product,
    /// `AB = 0 ⇒ Φ(A)Φ(B) = 0` on the sides the map claims.
    WeakZeroProduct,
}

/// Preserver description read by `cnr verify`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub variant: Variant,
    pub expect: Expect,
    #[serde(default = "default_dim")]
    pub n: usize,
    /// `random` (seeded), `identity`, or a matrix file relative to this file.
    #[serde(default = "default_u")]
    pub u: String,
    #[serde(default = "default_sign")]
    pub sign: f64,
    pub rule: Option<RuleName>,
    #[serde(default)]
    pub use_i: bool,
    #[serde(default)]
    pub fixture: Fixture,
    /// Projection rank; defaults to the CaseII index of `c`, else 1.
    pub p: Option<usize>,
    #[serde(default)]
    pub check: Check,
}

fn default_dim() -> usize {
    4
}

fn default_u() -> String {
    "random".into()
}

fn default_sign() -> f64 {
    1.0
}

pub fn read_map(path: &Path) -> Result<MapConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let map: MapConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?;
    if map.n == 0 {
        return Err(CliError::usage("map file: n must be positive"));
    }
    Ok(map)
}

pub fn resolve_unitary(map: &MapConfig, map_path: &Path, seed: u64) -> Result<ComplexMatrix, CliError> {
    match map.u.as_str() {
        "random" => Ok(random_unitary(map.n, seed)?),
        "identity" => Ok(ComplexMatrix::identity(map.n)),
        file => {
            let mut path = PathBuf::from(file);
            if path.is_relative() {
                if let Some(dir) = map_path.parent() {
                    path = dir.join(path);
                }
            }
            let u = read_matrix(&path)?;
            if u.rows() != map.n || u.cols() != map.n {
                return Err(CliError::usage(format!(
                    "{}: unitary is {}×{}, map file says n = {}",
                    path.display(),
                    u.rows(),
                    u.cols(),
                    map.n
                )));
            }
            Ok(u)
        }
    }
}
