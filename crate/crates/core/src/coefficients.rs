//! Weight vectors `c = (c_1, ..., c_k)` and the quantities derived from them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension of the Hilbert space an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmbientDim {
    Finite(usize),
    /// Infinite-dimensional space; operators are a finite block plus a zero tail.
    Infinite,
}

impl AmbientDim {
    /// True when the space is strictly larger than `k`.
    pub fn exceeds(&self, k: usize) -> bool {
        match *self {
            AmbientDim::Finite(n) => n > k,
            AmbientDim::Infinite => true,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, AmbientDim::Infinite)
    }
}

impl fmt::Display for AmbientDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmbientDim::Finite(n) => write!(f, "finite:{n}"),
            AmbientDim::Infinite => write!(f, "infinite"),
        }
    }
}

/// Parses `finite:N` or `infinite`.
impl std::str::FromStr for AmbientDim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("infinite") {
            return Ok(AmbientDim::Infinite);
        }
        let n = s
            .strip_prefix("finite:")
            .and_then(|n| n.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse {
                line: 1,
                column: 1,
                message: format!("expected `finite:N` or `infinite`, got `{s}`"),
            })?;
        if n == 0 {
            return Err(Error::Dimension("ambient dimension must be positive".into()));
        }
        Ok(AmbientDim::Finite(n))
    }
}

/// A non-increasing, non-constant weight vector with at least two entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientVector {
    entries: Vec<f64>,
}

impl CoefficientVector {
    /// Validates `entries`. Unsorted input is rejected, not sorted.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::Coefficients(format!(
                "need at least two entries, got {}",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|x| !x.is_finite()) {
            return Err(Error::Coefficients(format!("non-finite entry {bad}")));
        }
        if let Some(j) = entries.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::Coefficients(format!(
                "entries must be non-increasing: c_{} = {} < c_{} = {}",
                j + 1,
                entries[j],
                j + 2,
                entries[j + 1]
            )));
        }
        if entries.first() == entries.last() {
            return Err(Error::Coefficients("entries are all equal".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false; a valid vector has at least two entries.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One-based access, `c(1) = c_1`.
    pub fn c(&self, j: usize) -> f64 {
        self.entries[j - 1]
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// `r_c` is a norm exactly when the entries do not sum to zero.
    pub fn radius_is_norm(&self) -> bool {
        self.sum() != 0.0
    }

    /// `beta * c`, reordered so the result is again non-increasing.
    pub fn scaled(&self, beta: f64) -> Result<Self> {
        let mut v: Vec<f64> = self.entries.iter().map(|x| beta * x).collect();
        if beta < 0.0 {
            v.reverse();
        }
        Self::new(v)
    }

    /// Pair sum `c_j + c_{k+1-j}` (one-based `j`).
    pub fn pair_sum(&self, j: usize) -> f64 {
        let k = self.len();
        self.c(j) + self.c(k + 1 - j)
    }

    pub fn regime(&self) -> RegimeClass {
        classify_regime(self)
    }

    pub fn adjusted(&self, ambient: AmbientDim) -> Result<AdjustedCoefficients> {
        adjusted(self, ambient)
    }

    pub fn padded(&self, n: usize) -> Result<Vec<f64>> {
        pad_to_dimension(self, n)
    }
}

impl fmt::Display for CoefficientVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|x| format!("{x}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Which of the three preserver-form regimes a weight vector falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeClass {
    /// `c_1 + c_k != 0`.
    CaseI,
    /// The first `p - 1` pair sums vanish and the `p`-th does not.
    CaseII { p: usize },
    /// Every pair sum vanishes.
    CaseIII,
}

impl fmt::Display for RegimeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeClass::CaseI => write!(f, "CaseI"),
            RegimeClass::CaseII { p } => write!(f, "CaseII(p={p})"),
            RegimeClass::CaseIII => write!(f, "CaseIII"),
        }
    }
}

/// Exact comparisons only: a tolerance would silently move inputs between regimes.
pub fn classify_regime(c: &CoefficientVector) -> RegimeClass {
    let k = c.len();
    if c.pair_sum(1) != 0.0 {
        return RegimeClass::CaseI;
    }
    match (2..=k).find(|&j| c.pair_sum(j) != 0.0) {
        Some(p) => RegimeClass::CaseII { p },
        None => RegimeClass::CaseIII,
    }
}

/// `cbar_j` / `ctilde_j`: the entries themselves when the ambient dimension
/// equals `k`, otherwise their positive and negative parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustedCoefficients {
    pub cbar: Vec<f64>,
    pub ctilde: Vec<f64>,
    pub ambient: AmbientDim,
}

impl AdjustedCoefficients {
    /// One-based `cbar_j`.
    pub fn cbar(&self, j: usize) -> f64 {
        self.cbar[j - 1]
    }

    /// One-based `ctilde_j`.
    pub fn ctilde(&self, j: usize) -> f64 {
        self.ctilde[j - 1]
    }

    pub fn k(&self) -> usize {
        self.cbar.len()
    }

    /// `cbar_1`
    pub fn top(&self) -> f64 {
        self.cbar[0]
    }

    /// `ctilde_k`
    pub fn bottom(&self) -> f64 {
        self.ctilde[self.ctilde.len() - 1]
    }
}

pub fn adjusted(c: &CoefficientVector, ambient: AmbientDim) -> Result<AdjustedCoefficients> {
    let k = c.len();
    if let AmbientDim::Finite(n) = ambient {
        if n < k {
            return Err(Error::Dimension(format!(
                "ambient dimension {n} is smaller than k = {k}"
            )));
        }
    }
    let (cbar, ctilde) = if ambient.exceeds(k) {
        (
            c.entries().iter().map(|&x| x.max(0.0)).collect(),
            c.entries().iter().map(|&x| x.min(0.0)).collect(),
        )
    } else {
        (c.entries().to_vec(), c.entries().to_vec())
    };
    Ok(AdjustedCoefficients {
        cbar,
        ctilde,
        ambient,
    })
}

/// `c` extended by `n - k` zeros and re-sorted non-increasing.
pub fn pad_to_dimension(c: &CoefficientVector, n: usize) -> Result<Vec<f64>> {
    let k = c.len();
    if n < k {
        return Err(Error::Dimension(format!(
            "cannot pad {k} coefficients to dimension {n}"
        )));
    }
    let mut d = c.entries().to_vec();
    d.resize(n, 0.0);
    d.sort_by(|a, b| b.total_cmp(a));
    // total_cmp orders -0.0 below 0.0; normalize so equal zeros compare equal.
    for x in &mut d {
        if *x == 0.0 {
            *x = 0.0;
        }
    }
    Ok(d)
}

/// Parses a comma-separated list such as `1,0,-1`.
pub fn parse_coefficients(text: &str) -> Result<CoefficientVector> {
    let mut entries = Vec::new();
    for (i, tok) in text.split(',').enumerate() {
        let tok = tok.trim();
        let v: f64 = tok.parse().map_err(|_| Error::Parse {
            line: 1,
            column: i + 1,
            message: format!("'{tok}' is not a real number"),
        })?;
        entries.push(v);
    }
    CoefficientVector::new(entries)
}
