//! Maps that preserve `W_c` of operator products, their counterexamples, and
//! sampled checks of the defining properties.
//!
//! The checks are falsifiers: they run seeded random trials and report every
//! trial with its seed so a failure can be replayed.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{AmbientDim, CoefficientVector, RegimeClass};
use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::linalg::{
    numerical_rank, operator_norm, random_matrix, random_rank_r, random_unit_vector, rank_one, right_singular_pairs,
    ComplexMatrix, OperatorModel, DEFAULT_RANK_TOL,
};
use crate::range::{boundary, is_symmetric, support_deviation, DEFAULT_GRID};
use crate::rng::SplitMix64;

pub const UNITARY_TOL: f64 = 1e-10;
/// Structured probes plus this many random ones in `membership_t`.
pub const DEFAULT_PROBES: usize = 32;
const ZERO_PRODUCT_RTOL: f64 = 1e-9;

/// A `±1`-valued function of an operator.
pub type SignRule = Arc<dyn Fn(&ComplexMatrix) -> f64 + Send + Sync>;

/// Named sign rules usable from configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    Plus,
    Minus,
    /// `−1` on operators of rank at most one, `+1` otherwise.
    NegativeOnRankOne,
    /// Sign of `Re tr A`, with `+1` at zero.
    TraceSign,
}

impl RuleName {
    pub fn rule(self) -> SignRule {
        match self {
            RuleName::Plus => Arc::new(|_| 1.0),
            RuleName::Minus => Arc::new(|_| -1.0),
            RuleName::NegativeOnRankOne => Arc::new(|a| match numerical_rank(a, DEFAULT_RANK_TOL) {
                Ok(r) if r <= 1 => -1.0,
                _ => 1.0,
            }),
            RuleName::TraceSign => Arc::new(|a| match a.trace() {
                Ok(t) if t.re < 0.0 => -1.0,
                _ => 1.0,
            }),
        }
    }
}

#[derive(Clone)]
pub enum PreserverMap {
    /// `Φ(A) = sign · UAU*`.
    CaseI { u: ComplexMatrix, sign: f64 },
    /// `Φ(A) = ε(A) · UAU*`.
    CaseII { u: ComplexMatrix, rule: SignRule },
    /// `Φ(A) = g(A) · UAU*`, times `i` when `use_i`.
    CaseIII { u: ComplexMatrix, g: SignRule, use_i: bool },
    /// `UAU*` on rank ≤ 1, `AU*` otherwise.
    Hybrid { u: ComplexMatrix },
    /// `Φ(A) = U Aᵗ U*`.
    Transpose { u: ComplexMatrix },
}

impl fmt::Debug for PreserverMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreserverMap::CaseI { sign, .. } => write!(f, "CaseI(sign = {sign})"),
            PreserverMap::CaseII { .. } => write!(f, "CaseII"),
            PreserverMap::CaseIII { use_i, .. } => write!(f, "CaseIII(use_i = {use_i})"),
            PreserverMap::Hybrid { .. } => write!(f, "Hybrid"),
            PreserverMap::Transpose { .. } => write!(f, "Transpose"),
        }
    }
}

fn check_unitary(u: &ComplexMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::Shape(format!("U is {}×{}", u.rows(), u.cols())));
    }
    let defect = (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.rows())).max_abs();
    if defect > UNITARY_TOL {
        return Err(Error::Contract(format!("U is not unitary (defect {defect:.3e})")));
    }
    Ok(())
}

/// `[[0, 1], [1, 0]] ⊕ I_{n−2}`.
pub fn swap_unitary(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::Dimension(format!("swap unitary needs n ≥ 2, got {n}")));
    }
    let mut u = ComplexMatrix::identity(n);
    u[(0, 0)] = Complex64::new(0.0, 0.0);
    u[(1, 1)] = Complex64::new(0.0, 0.0);
    u[(0, 1)] = Complex64::new(1.0, 0.0);
    u[(1, 0)] = Complex64::new(1.0, 0.0);
    Ok(u)
}

impl PreserverMap {
    pub fn case_one(u: ComplexMatrix, sign: f64) -> Result<Self> {
        check_unitary(&u)?;
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::Contract(format!("sign must be ±1, got {sign}")));
        }
        Ok(PreserverMap::CaseI { u, sign })
    }

    pub fn case_two(u: ComplexMatrix, rule: SignRule) -> Result<Self> {
        check_unitary(&u)?;
        Ok(PreserverMap::CaseII { u, rule })
    }

    pub fn case_three(u: ComplexMatrix, g: SignRule, use_i: bool) -> Result<Self> {
        check_unitary(&u)?;
        Ok(PreserverMap::CaseIII { u, g, use_i })
    }

    /// The hybrid map with `U = swap ⊕ I`.
    pub fn hybrid(n: usize) -> Result<Self> {
        Ok(PreserverMap::Hybrid { u: swap_unitary(n)? })
    }

    pub fn transpose(u: ComplexMatrix) -> Result<Self> {
        check_unitary(&u)?;
        Ok(PreserverMap::Transpose { u })
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        match self {
            PreserverMap::CaseI { u, .. }
            | PreserverMap::CaseII { u, .. }
            | PreserverMap::CaseIII { u, .. }
            | PreserverMap::Hybrid { u }
            | PreserverMap::Transpose { u } => u,
        }
    }

    pub fn dim(&self) -> usize {
        self.unitary().rows()
    }

    /// Whether `Φ` is a bijection of the form `X ↦ λ(X) V X V*`, so zero
    /// products can be checked from both sides.
    pub fn is_unitary_similarity(&self) -> bool {
        !matches!(self, PreserverMap::Hybrid { .. } | PreserverMap::Transpose { .. })
    }

    /// The regime whose preservers have this form, when there is one.
    pub fn regime_family(&self) -> Option<&'static str> {
        match self {
            PreserverMap::CaseI { .. } => Some("CaseI"),
            PreserverMap::CaseII { .. } => Some("CaseII"),
            PreserverMap::CaseIII { .. } => Some("CaseIII"),
            _ => None,
        }
    }
}

fn conjugate(u: &ComplexMatrix, a: &ComplexMatrix) -> ComplexMatrix {
    &(u * a) * &u.adjoint()
}

pub fn apply_map(phi: &PreserverMap, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let u = phi.unitary();
    if !a.is_square() || a.rows() != u.rows() {
        return Err(Error::Shape(format!(
            "map acts on {}×{} matrices, got {}×{}",
            u.rows(),
            u.rows(),
            a.rows(),
            a.cols()
        )));
    }
    Ok(match phi {
        PreserverMap::CaseI { sign, .. } => conjugate(u, a).scale_real(*sign),
        PreserverMap::CaseII { rule, .. } => conjugate(u, a).scale_real(rule(a)),
        PreserverMap::CaseIII { g, use_i, .. } => {
            let s = Complex64::new(g(a), 0.0) * if *use_i { Complex64::i() } else { Complex64::new(1.0, 0.0) };
            conjugate(u, a).scale(s)
        }
        PreserverMap::Hybrid { .. } => {
            if numerical_rank(a, DEFAULT_RANK_TOL)? <= 1 {
                conjugate(u, a)
            } else {
                a * &u.adjoint()
            }
        }
        PreserverMap::Transpose { .. } => conjugate(u, &a.transpose()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialEntry {
    pub trial: usize,
    pub pass: bool,
    pub max_dev: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub entries: Vec<TrialEntry>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.pass).count()
    }

    pub fn max_dev(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.max_dev))
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("entry serializes") + "\n")
            .collect()
    }
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    SplitMix64::stream(seed, trial as u64).next_u64()
}

/// Random pair for a trial. Every third trial makes `A` rank one and the next
/// makes `B` rank one, so rank-dependent sign rules are exercised.
pub fn trial_pair(n: usize, trial: usize, seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    let s = trial_seed(seed, trial);
    let a_seed = s;
    let b_seed = s ^ 0xA5A5_A5A5_A5A5_A5A5;
    let a = if trial % 3 == 1 { random_rank_r(n, 1, a_seed) } else { random_matrix(n, n, a_seed) };
    let b = if trial % 3 == 2 { random_rank_r(n, 1, b_seed) } else { random_matrix(n, n, b_seed) };
    (a, b)
}

/// Compares `W_c(Φ(A)Φ(B))` with `W_c(AB)` on the default grid.
pub fn verify_pair(
    phi: &PreserverMap,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &CoefficientVector,
    ambient: AmbientDim,
    tol: f64,
) -> Result<(bool, f64)> {
    let lhs = &apply_map(phi, a)? * &apply_map(phi, b)?;
    let rhs = a * b;
    let r1 = boundary(&OperatorModel::new(lhs, ambient)?, c, DEFAULT_GRID)?;
    let r2 = boundary(&OperatorModel::new(rhs, ambient)?, c, DEFAULT_GRID)?;
    let dev = support_deviation(&r1, &r2)?;
    Ok((dev <= tol * (1.0 + r2.max_abs_support()), dev))
}

pub fn verify_product_preservation(
    phi: &PreserverMap,
    c: &CoefficientVector,
    trials: usize,
    n: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    verify_product_preservation_with(phi, c, trials, n, seed, tol, Execution::default())
}

/// Seeded random trials of `W_c(Φ(A)Φ(B)) = W_c(AB)` on `n × n` matrices.
/// Trials are independent and reported in trial order.
pub fn verify_product_preservation_with(
    phi: &PreserverMap,
    c: &CoefficientVector,
    trials: usize,
    n: usize,
    seed: u64,
    tol: f64,
    exec: Execution,
) -> Result<VerificationReport> {
    if n != phi.dim() {
        return Err(Error::Shape(format!("map acts in dimension {}, trials asked for {n}", phi.dim())));
    }
    if n < c.len() {
        return Err(Error::Dimension(format!("k = {} exceeds dimension {n}", c.len())));
    }
    let entries = map_indices(trials, exec, |trial| {
        let (a, b) = trial_pair(n, trial, seed);
        verify_pair(phi, &a, &b, c, AmbientDim::Finite(n), tol).map(|(pass, max_dev)| TrialEntry {
            trial,
            pass,
            max_dev,
            seed: trial_seed(seed, trial),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport { entries })
}

/// `I_p ⊕ 0` in dimension `n`.
pub fn projection_fixture(p: usize, n: usize) -> Result<ComplexMatrix> {
    if p > n {
        return Err(Error::Dimension(format!("rank {p} projection in dimension {n}")));
    }
    let d: Vec<f64> = (0..n).map(|i| if i < p { 1.0 } else { 0.0 }).collect();
    Ok(ComplexMatrix::diag_real(&d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroSide {
    /// `AT = 0 ⇒ Φ(A)Φ(T) = 0`.
    Left,
    /// `TA = 0 ⇒ Φ(T)Φ(A) = 0`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroProductEntry {
    pub trial: usize,
    pub side: ZeroSide,
    pub pass: bool,
    pub skipped: bool,
    pub residual: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroProductReport {
    pub entries: Vec<ZeroProductEntry>,
}

impl ZeroProductReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass || e.skipped)
    }

    pub fn checked(&self, side: ZeroSide) -> usize {
        self.entries.iter().filter(|e| e.side == side && !e.skipped).count()
    }
}

/// `A` with its smallest singular direction removed, and a unit kernel vector.
fn singularize(a: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<Complex64>)> {
    let pairs = right_singular_pairs(a)?;
    let (_, v) = pairs.last().expect("non-empty matrix").clone();
    let proj = rank_one(&v, &v);
    let a0 = a - &(a * &proj);
    Ok((a0, v))
}

fn zero_entry(
    phi: &PreserverMap,
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    trial: usize,
    side: ZeroSide,
    seed: u64,
) -> Result<ZeroProductEntry> {
    let (px, py) = (apply_map(phi, x)?, apply_map(phi, y)?);
    let residual = operator_norm(&(&px * &py))?;
    let scale = 1.0 + operator_norm(&px)? * operator_norm(&py)?;
    Ok(ZeroProductEntry {
        trial,
        side,
        pass: residual <= ZERO_PRODUCT_RTOL * scale,
        skipped: false,
        residual,
        seed,
    })
}

/// For seeded random singular `A` and rank-1 `T = x⊗f` with `AT = 0`, checks
/// `Φ(A)Φ(T) = 0`; for unitary-similarity maps also checks `TA = 0 ⇒
/// Φ(T)Φ(A) = 0`.
pub fn weak_zero_product_check(phi: &PreserverMap, trials: usize, n: usize, seed: u64) -> Result<ZeroProductReport> {
    if n != phi.dim() {
        return Err(Error::Shape(format!("map acts in dimension {}, trials asked for {n}", phi.dim())));
    }
    let both = phi.is_unitary_similarity();
    let per_trial = map_indices(trials, Execution::default(), |trial| -> Result<Vec<ZeroProductEntry>> {
        let s = trial_seed(seed, trial);
        let (a, kernel) = singularize(&random_matrix(n, n, s))?;
        let smax = operator_norm(&a)?;
        if operator_norm(&a.matmul(&rank_one(&kernel, &kernel))?)? > 1e-10 * (1.0 + smax) {
            let skip = ZeroProductEntry {
                trial,
                side: ZeroSide::Left,
                pass: false,
                skipped: true,
                residual: f64::NAN,
                seed: s,
            };
            return Ok(vec![skip]);
        }
        let f = random_unit_vector(n, s ^ 0x5151);
        let t = rank_one(&kernel, &f);
        let mut out = vec![zero_entry(phi, &a, &t, trial, ZeroSide::Left, s)?];
        if both {
            // f ∈ ker A* gives (x⊗f)A = x (A* f)* = 0.
            let (_, cokernel) = singularize(&a.adjoint())?;
            let t = rank_one(&random_unit_vector(n, s ^ 0x7373), &cokernel);
            out.push(zero_entry(phi, &t, &a, trial, ZeroSide::Right, s)?);
        }
        Ok(out)
    });
    let mut entries = Vec::new();
    for r in per_trial {
        entries.extend(r?);
    }
    Ok(ZeroProductReport { entries })
}

/// The pair `A = [[0,1],[0,0]] ⊕ 0`, `B = [[1,0],[0,0]] ⊕ I_{n−2}` with
/// `AB = 0`, and `‖Φ(A)Φ(B)‖` under the hybrid map.
pub fn hybrid_zero_product_violation(n: usize) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
    if n < 3 {
        return Err(Error::Dimension(format!("the hybrid fixture needs n ≥ 3, got {n}")));
    }
    let phi = PreserverMap::hybrid(n)?;
    let mut a = ComplexMatrix::zeros(n, n);
    a[(0, 1)] = Complex64::new(1.0, 0.0);
    let mut b = ComplexMatrix::identity(n);
    b[(1, 1)] = Complex64::new(0.0, 0.0);
    let norm = operator_norm(&(&apply_map(&phi, &a)? * &apply_map(&phi, &b)?))?;
    Ok((a, b, norm))
}

/// `W_c(A) = −W_c(A)` on the default grid.
pub fn membership_s(a: &OperatorModel, c: &CoefficientVector, tol: f64) -> Result<bool> {
    is_symmetric(&boundary(a, c, DEFAULT_GRID)?, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductSide {
    /// `AB` is not symmetric.
    Right,
    /// `BA` is not symmetric.
    Left,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipT {
    pub in_s: bool,
    pub in_t: bool,
    /// Probe `B` and the side on which the product left the symmetric set.
    pub witness: Option<(ComplexMatrix, ProductSide)>,
    pub probes_tried: usize,
}

/// `I_{p−1} ⊕ (−2) ⊕ 0` in dimension `m`.
pub fn g_fixture(p: usize, m: usize) -> Result<ComplexMatrix> {
    if p == 0 || p > m {
        return Err(Error::Dimension(format!("G fixture with p = {p} in dimension {m}")));
    }
    let d: Vec<f64> = (0..m)
        .map(|i| match i {
            _ if i + 1 < p => 1.0,
            _ if i + 1 == p => -2.0,
            _ => 0.0,
        })
        .collect();
    Ok(ComplexMatrix::diag_real(&d))
}

fn structured_probes(m: usize, c: &CoefficientVector, seed: u64) -> Result<Vec<ComplexMatrix>> {
    let mut probes = Vec::new();
    if let RegimeClass::CaseII { p } = c.regime() {
        if p <= m {
            probes.push(g_fixture(p, m)?);
        }
    }
    let diag: Vec<f64> = (0..m).map(|i| (i + 1) as f64).collect();
    probes.push(ComplexMatrix::diag_real(&diag));
    probes.push(rank_one(&random_unit_vector(m, seed ^ 0x11), &random_unit_vector(m, seed ^ 0x22)));
    Ok(probes)
}

/// Sampled test for membership in `T`: `A ∈ S` and `AB, BA ∈ S` for every
/// probe `B`. A negative answer comes with its witness; a positive one only
/// means no probe found a counterexample.
pub fn membership_t(a: &OperatorModel, c: &CoefficientVector, probes: usize, seed: u64, tol: f64) -> Result<MembershipT> {
    if !membership_s(a, c, tol)? {
        return Ok(MembershipT {
            in_s: false,
            in_t: false,
            witness: None,
            probes_tried: 0,
        });
    }
    let m = a.block_size();
    let mut candidates = structured_probes(m, c, seed)?;
    candidates.extend((0..probes).map(|i| random_matrix(m, m, trial_seed(seed, i))));
    for (i, b) in candidates.iter().enumerate() {
        let ab = a.with_block(a.block() * b)?;
        if !membership_s(&ab, c, tol)? {
            return Ok(MembershipT {
                in_s: true,
                in_t: false,
                witness: Some((b.clone(), ProductSide::Right)),
                probes_tried: i + 1,
            });
        }
        let ba = a.with_block(b * a.block())?;
        if !membership_s(&ba, c, tol)? {
            return Ok(MembershipT {
                in_s: true,
                in_t: false,
                witness: Some((b.clone(), ProductSide::Left)),
                probes_tried: i + 1,
            });
        }
    }
    Ok(MembershipT {
        in_s: true,
        in_t: true,
        witness: None,
        probes_tried: candidates.len(),
    })
}

/// Allowed values of `ε(A)ε(B)` for `Φ(X) = ε(X)UXU*` to preserve `W_c(AB)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConstraint {
    /// Only `+1`.
    Fixed,
    /// `±1`, because `W_c(AB)` is symmetric.
    Either,
}

pub fn sign_constraint(a: &OperatorModel, b: &ComplexMatrix, c: &CoefficientVector, tol: f64) -> Result<SignConstraint> {
    let ab = a.with_block(a.block().matmul(b)?)?;
    Ok(if membership_s(&ab, c, tol)? {
        SignConstraint::Either
    } else {
        SignConstraint::Fixed
    })
}

/// True iff signs `ε_A, ε_B` keep `W_c(AB)` unchanged.
pub fn sign_admissible(
    a: &OperatorModel,
    b: &ComplexMatrix,
    eps_a: f64,
    eps_b: f64,
    c: &CoefficientVector,
    tol: f64,
) -> Result<bool> {
    if eps_a * eps_b == 1.0 {
        return Ok(true);
    }
    Ok(sign_constraint(a, b, c, tol)? == SignConstraint::Either)
}
