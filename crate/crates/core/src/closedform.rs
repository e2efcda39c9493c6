//! Closed forms for low-rank operators: rank-1 ellipses, rank-2 segments and
//! ellipses, the piecewise rank-2 support function that is not an ellipse,
//! trace recovery from foci, and symmetry prediction for self-adjoint input.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{adjusted, pad_to_dimension, AmbientDim, CoefficientVector, RegimeClass};
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, operator_norm, ComplexMatrix, OperatorModel, DEFAULT_RANK_TOL, HERMITIAN_TOL};
use crate::range::{grid_angle, Interval, RangeRegion, SupportFunction};

/// Tolerance on `|tr T| = ‖T‖` below which a rank-1 range is a segment.
pub const SEGMENT_TOL: f64 = 1e-10;
/// Relative fit residual above which a region is declared not an ellipse.
pub const NON_ELLIPSE_RTOL: f64 = 1e-4;
const FIT_ITERS: usize = 50;

/// Closed elliptical disk given by its foci and semi-minor axis. A zero
/// semi-minor axis gives the segment between the foci.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "EllipseJson", from = "EllipseJson")]
pub struct EllipseDescriptor {
    pub focus1: Complex64,
    pub focus2: Complex64,
    pub semi_minor: f64,
}

#[derive(Serialize, Deserialize)]
struct EllipseJson {
    f1: [f64; 2],
    f2: [f64; 2],
    semi_minor: f64,
}

impl From<EllipseDescriptor> for EllipseJson {
    fn from(e: EllipseDescriptor) -> Self {
        Self {
            f1: [e.focus1.re, e.focus1.im],
            f2: [e.focus2.re, e.focus2.im],
            semi_minor: e.semi_minor,
        }
    }
}

impl From<EllipseJson> for EllipseDescriptor {
    fn from(j: EllipseJson) -> Self {
        Self {
            focus1: Complex64::new(j.f1[0], j.f1[1]),
            focus2: Complex64::new(j.f2[0], j.f2[1]),
            semi_minor: j.semi_minor.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    None,
    Segment,
    Point,
}

impl EllipseDescriptor {
    pub fn new(focus1: Complex64, focus2: Complex64, semi_minor: f64) -> Result<Self> {
        if !(semi_minor >= 0.0) || !focus1.is_finite() || !focus2.is_finite() {
            return Err(Error::Contract(format!(
                "invalid ellipse: foci {focus1}, {focus2}, semi-minor {semi_minor}"
            )));
        }
        Ok(Self {
            focus1,
            focus2,
            semi_minor,
        })
    }

    /// Ellipse with foci `center ± β e^{iψ}`.
    pub fn from_center(center: Complex64, beta: f64, psi: f64, alpha: f64) -> Self {
        let offset = Complex64::from_polar(beta.abs(), psi);
        Self {
            focus1: center + offset,
            focus2: center - offset,
            semi_minor: alpha.abs(),
        }
    }

    pub fn center(&self) -> Complex64 {
        (self.focus1 + self.focus2) / 2.0
    }

    /// Half the focal distance.
    pub fn beta(&self) -> f64 {
        (self.focus1 - self.focus2).norm() / 2.0
    }

    /// Direction of the major axis.
    pub fn axis_angle(&self) -> f64 {
        (self.focus1 - self.focus2).arg()
    }

    pub fn semi_major(&self) -> f64 {
        self.beta().hypot(self.semi_minor)
    }

    pub fn degeneracy(&self, tol: f64) -> Degeneracy {
        let scale = 1.0 + self.focus1.norm().max(self.focus2.norm());
        if self.semi_minor > tol * scale {
            Degeneracy::None
        } else if self.beta() > tol * scale {
            Degeneracy::Segment
        } else {
            Degeneracy::Point
        }
    }

    /// `Re(e^{iθ} center) + sqrt(β² cos²(θ + ψ) + α²)`.
    pub fn support(&self, theta: f64) -> f64 {
        let b = self.beta();
        let c = (theta + self.axis_angle()).cos();
        (Complex64::from_polar(1.0, theta) * self.center()).re + (b * b * c * c + self.semi_minor * self.semi_minor).sqrt()
    }

    pub fn support_grid(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.support(grid_angle(i, n))).collect()
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        (z - self.focus1).norm() + (z - self.focus2).norm() <= 2.0 * self.semi_major() + tol
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ellipse serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

/// `W_c(T)` for a rank-1 operator `T`.
pub fn rank1_range(t: &OperatorModel, c: &CoefficientVector) -> Result<EllipseDescriptor> {
    let rank = numerical_rank(t.block(), DEFAULT_RANK_TOL)?;
    if rank != 1 {
        return Err(Error::Contract(format!("rank1_range needs rank 1, got rank {rank}")));
    }
    let adj = adjusted(c, t.ambient())?;
    let tr = t.block().trace()?;
    let norm = operator_norm(t.block())?;
    let gap = norm * norm - tr.norm_sqr();
    let semi_minor = if norm - tr.norm() <= SEGMENT_TOL * (1.0 + norm) {
        0.0
    } else {
        0.5 * (adj.top() - adj.bottom()) * gap.max(0.0).sqrt()
    };
    EllipseDescriptor::new(tr * adj.top(), tr * adj.bottom(), semi_minor)
}

/// `A = [[a, d], [0, b]] ⊕ 0` on the given ambient space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank2CaseInput {
    pub a: f64,
    pub b: f64,
    pub d: Complex64,
    pub ambient: AmbientDim,
}

impl Rank2CaseInput {
    pub fn block(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(self.a, 0.0);
        m[(0, 1)] = self.d;
        m[(1, 1)] = Complex64::new(self.b, 0.0);
        m
    }

    pub fn operator(&self) -> Result<OperatorModel> {
        OperatorModel::new(self.block(), self.ambient)
    }
}

/// `W_c(diag(a, b) ⊕ 0)` for the three sign patterns `a ≥ b > 0`,
/// `a > 0 > b`, `0 > a ≥ b`.
///
/// The second coefficient at each end is read from the zero-padded vector:
/// with exactly one padding zero, `max(c_2, 0)` and `min(c_{k-1}, 0)` can
/// differ from the second largest and second smallest padded entries.
pub fn rank2_diag_range(a: f64, b: f64, c: &CoefficientVector, ambient: AmbientDim) -> Result<Interval> {
    if let AmbientDim::Finite(n) = ambient {
        if n < 2 {
            return Err(Error::Dimension(format!("rank-2 input needs ambient dimension ≥ 2, got {n}")));
        }
    }
    let adj = adjusted(c, ambient)?;
    let k = adj.k();
    // Two zeros are enough to stand in for an infinite tail.
    let padded = match ambient {
        AmbientDim::Finite(n) => pad_to_dimension(c, n)?,
        AmbientDim::Infinite => pad_to_dimension(c, k + 2)?,
    };
    let len = padded.len();
    let (c1, c2) = (padded[0], padded[1]);
    let (ck, ck1) = (padded[len - 1], padded[len - 2]);
    if a >= b && b > 0.0 {
        Interval::new(ck * a + ck1 * b, c1 * a + c2 * b)
    } else if a > 0.0 && 0.0 > b {
        Interval::new(ck * a + c1 * b, c1 * a + ck * b)
    } else if 0.0 > a && a >= b {
        Interval::new(c1 * b + c2 * a, ck * b + ck1 * a)
    } else {
        Err(Error::Contract(format!(
            "({a}, {b}) is not one of a ≥ b > 0, a > 0 > b, 0 > a ≥ b"
        )))
    }
}

/// `W_c([[a, d], [0, b]] ⊕ 0)` when `|d|² > 4|ab|`: then `Re(e^{iθ}A)` has one
/// positive and one negative eigenvalue at every angle, and the range is an
/// elliptical disk.
pub fn rank2_ellipse(a: f64, b: f64, d: Complex64, c: &CoefficientVector, ambient: AmbientDim) -> Result<EllipseDescriptor> {
    if !(d.norm_sqr() > 4.0 * (a * b).abs()) {
        return Err(Error::Contract(format!(
            "need |d|² > 4|ab|, got |d|² = {} and 4|ab| = {}",
            d.norm_sqr(),
            4.0 * (a * b).abs()
        )));
    }
    let adj = adjusted(c, ambient)?;
    let (top, bottom) = (adj.top(), adj.bottom());
    EllipseDescriptor::new(
        Complex64::new(top * a + bottom * b, 0.0),
        Complex64::new(top * b + bottom * a, 0.0),
        0.5 * (top - bottom) * d.norm(),
    )
}

/// Support function of `W_c([[a, d], [0, b]] ⊕ 0)` for `a ≥ b > 0`,
/// `0 < |d|² < 4ab` and `c_1 + c_k = c_2 + c_{k-1} = 0`. With
/// `cos²φ = |d|²/(4ab)`:
///
/// * `|θ| ≤ φ`: `ċ(a+b)cos θ + c̈ s(θ)`
/// * `|θ − π| ≤ φ`: `−ċ(a+b)cos θ + c̈ s(θ)`
/// * otherwise: `(ċ + c̈) s(θ)`
///
/// where `s(θ) = sqrt((a−b)² cos²θ + |d|²)`.
pub fn rank2_nonellipse_support(
    a: f64,
    b: f64,
    d: Complex64,
    c: &CoefficientVector,
    ambient: AmbientDim,
    theta: f64,
) -> Result<f64> {
    let k = c.len();
    if c.pair_sum(1) != 0.0 || c.pair_sum(2) != 0.0 {
        return Err(Error::Contract(format!(
            "need c_1 + c_k = c_2 + c_(k-1) = 0, got c = {c}"
        )));
    }
    if !ambient.exceeds(2) {
        return Err(Error::Contract(format!("need ambient dimension ≥ 3, got {ambient}")));
    }
    if let AmbientDim::Finite(n) = ambient {
        if n < k {
            return Err(Error::Dimension(format!("k = {k} exceeds ambient dimension {n}")));
        }
    }
    let dd = d.norm_sqr();
    if !(a >= b && b > 0.0 && dd > 0.0 && dd < 4.0 * a * b) {
        return Err(Error::Contract(format!(
            "need a ≥ b > 0 and 0 < |d|² < 4ab, got a = {a}, b = {b}, |d|² = {dd}"
        )));
    }
    let (cdot, cddot) = if k == 2 {
        (c.c(1) / 2.0, c.c(1) / 2.0)
    } else {
        ((c.c(1) + c.c(2)) / 2.0, (c.c(1) - c.c(2)) / 2.0)
    };
    let cos_phi = (dd / (4.0 * a * b)).sqrt();
    let ct = theta.cos();
    let s = ((a - b) * (a - b) * ct * ct + dd).sqrt();
    Ok(if ct >= cos_phi {
        cdot * (a + b) * ct + cddot * s
    } else if ct <= -cos_phi {
        -cdot * (a + b) * ct + cddot * s
    } else {
        (cdot + cddot) * s
    })
}

/// Outcome of fitting an ellipse support function to a region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseFit {
    pub is_ellipse: bool,
    pub best_fit: EllipseDescriptor,
    /// Largest absolute support gap between the fit and the samples.
    pub residual: f64,
}

/// Parameters `[x, y, β, ψ, α]` of `x cos θ − y sin θ + sqrt(β² cos²(θ+ψ) + α²)`.
type FitParams = [f64; 5];

fn fit_model(p: &FitParams, theta: f64) -> (f64, [f64; 5]) {
    let [x, y, beta, psi, alpha] = *p;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = (theta + psi).sin_cos();
    let s = (beta * beta * cp * cp + alpha * alpha).sqrt();
    let inv = if s > 1e-300 { 1.0 / s } else { 0.0 };
    let value = x * ct - y * st + s;
    let grad = [ct, -st, beta * cp * cp * inv, -beta * beta * cp * sp * inv, alpha * inv];
    (value, grad)
}

fn fit_residuals(p: &FitParams, h: &[f64]) -> Vec<f64> {
    let n = h.len();
    (0..n).map(|i| fit_model(p, grid_angle(i, n)).0 - h[i]).collect()
}

/// Solves the 5×5 system `m x = v` by Gaussian elimination with pivoting.
fn solve5(mut m: [[f64; 5]; 5], mut v: [f64; 5]) -> Option<[f64; 5]> {
    for col in 0..5 {
        let piv = (col..5).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        v.swap(col, piv);
        for r in col + 1..5 {
            let f = m[r][col] / m[col][col];
            let pivot_row = m[col];
            for (dst, src) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
            v[r] -= f * v[col];
        }
    }
    let mut x = [0.0; 5];
    for r in (0..5).rev() {
        let s: f64 = (r + 1..5).map(|cc| m[r][cc] * x[cc]).sum();
        x[r] = (v[r] - s) / m[r][r];
    }
    Some(x)
}

/// Closed-form start: the first harmonic of `h` is exactly the center term,
/// and `g² = β²/2 + α² + (β²/2) cos(2θ + 2ψ)` for the even remainder `g`.
fn initial_fit(h: &[f64]) -> FitParams {
    let n = h.len() as f64;
    let angles: Vec<f64> = (0..h.len()).map(|i| grid_angle(i, h.len())).collect();
    let x = 2.0 / n * h.iter().zip(&angles).map(|(v, t)| v * t.cos()).sum::<f64>();
    let y = -2.0 / n * h.iter().zip(&angles).map(|(v, t)| v * t.sin()).sum::<f64>();
    let g2: Vec<f64> = h
        .iter()
        .zip(&angles)
        .map(|(v, t)| {
            let g = v - (x * t.cos() - y * t.sin());
            g * g
        })
        .collect();
    let a0 = g2.iter().sum::<f64>() / n;
    let a1 = 2.0 / n * g2.iter().zip(&angles).map(|(v, t)| v * (2.0 * t).cos()).sum::<f64>();
    let a2 = 2.0 / n * g2.iter().zip(&angles).map(|(v, t)| v * (2.0 * t).sin()).sum::<f64>();
    let half_beta2 = a1.hypot(a2);
    let psi = (-a2).atan2(a1) / 2.0;
    let alpha2 = (a0 - half_beta2).max(0.0);
    [x, y, (2.0 * half_beta2).sqrt(), psi, alpha2.sqrt()]
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Least-squares ellipse fit to a sampled support function (Levenberg–Marquardt
/// from the closed-form start).
pub fn fit_support(support: &SupportFunction) -> (EllipseDescriptor, f64) {
    let h = support.values();
    let n = h.len();
    let mut p = initial_fit(h);
    let mut r = fit_residuals(&p, h);
    let mut cost = sum_sq(&r);
    let mut mu = 1e-3;
    for _ in 0..FIT_ITERS {
        let mut jtj = [[0.0; 5]; 5];
        let mut jtr = [0.0; 5];
        for (i, ri) in r.iter().enumerate() {
            let (_, g) = fit_model(&p, grid_angle(i, n));
            for a in 0..5 {
                jtr[a] -= g[a] * ri;
                for b in 0..5 {
                    jtj[a][b] += g[a] * g[b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..8 {
            let mut m = jtj;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] += mu * (jtj[a][a] + 1e-12);
            }
            let Some(step) = solve5(m, jtr) else {
                mu *= 4.0;
                continue;
            };
            let trial: FitParams = std::array::from_fn(|a| p[a] + step[a]);
            let tr = fit_residuals(&trial, h);
            let tc = sum_sq(&tr);
            if tc < cost {
                p = trial;
                r = tr;
                cost = tc;
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved || cost == 0.0 {
            break;
        }
    }
    let residual = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let [x, y, beta, psi, alpha] = p;
    (EllipseDescriptor::from_center(Complex64::new(x, y), beta, psi, alpha), residual)
}

/// Fits an ellipse support function to the region's samples; the region is
/// an ellipse iff the largest residual is at most `tol · (1 + max|h|)`.
pub fn is_ellipse(region: &RangeRegion, tol: f64) -> EllipseFit {
    let scale = 1.0 + region.max_abs_support();
    if let crate::range::RegionShape::Point { at } = region.shape() {
        let z = Complex64::new(at[0], at[1]);
        let best_fit = EllipseDescriptor::from_center(z, 0.0, 0.0, 0.0);
        let residual = region
            .support()
            .values()
            .iter()
            .enumerate()
            .fold(0.0f64, |m, (i, h)| m.max((best_fit.support(region.support().angle(i)) - h).abs()));
        return EllipseFit {
            is_ellipse: residual <= tol * scale,
            best_fit,
            residual,
        };
    }
    let (best_fit, residual) = fit_support(region.support());
    EllipseFit {
        is_ellipse: residual <= tol * scale,
        best_fit,
        residual,
    }
}

/// Candidates for `tr T` given `rank1_range(T, c)`, whose foci are
/// `c̄_1 tr T` and `c̃_k tr T` in some order. The trace is determined up to
/// sign exactly when `c_1 + c_k = 0`.
pub fn trace_candidates(e: &EllipseDescriptor, c: &CoefficientVector, ambient: AmbientDim) -> Result<Vec<Complex64>> {
    let adj = adjusted(c, ambient)?;
    let (top, bottom) = (adj.top(), adj.bottom());
    let tol = 1e-8 * (1.0 + e.focus1.norm().max(e.focus2.norm()));
    let solve = |f_top: Complex64, f_bottom: Complex64| -> Option<Complex64> {
        let t = if top.abs() >= bottom.abs() { f_top / top } else { f_bottom / bottom };
        ((f_top - t * top).norm() <= tol && (f_bottom - t * bottom).norm() <= tol).then_some(t)
    };
    let mut out: Vec<Complex64> = Vec::new();
    for t in [solve(e.focus1, e.focus2), solve(e.focus2, e.focus1)].into_iter().flatten() {
        if !out.iter().any(|s| (s - t).norm() <= tol) {
            out.push(t);
        }
    }
    if out.is_empty() {
        return Err(Error::Contract(format!(
            "foci {} and {} are not c̄_1 t and c̃_k t for any t (c̄_1 = {top}, c̃_k = {bottom})",
            e.focus1, e.focus2
        )));
    }
    if c.pair_sum(1) == 0.0 {
        let t = out[0];
        if !out.iter().any(|s| (s + t).norm() <= tol) {
            out.push(-t);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryPrediction {
    Symmetric,
    Asymmetric,
    Unknown,
}

/// Predicts whether `W_c(S) = −W_c(S)` for self-adjoint `S` and `c` in
/// CaseII(p): symmetric below rank `p`, asymmetric at rank `p` when `S` or
/// `−S` is positive, undecided otherwise.
pub fn symmetry_predict(s: &OperatorModel, c: &CoefficientVector) -> Result<SymmetryPrediction> {
    let RegimeClass::CaseII { p } = c.regime() else {
        return Err(Error::Contract(format!("symmetry prediction needs a CaseII vector, got {}", c.regime())));
    };
    if !s.block().is_hermitian(HERMITIAN_TOL) {
        return Err(Error::Contract("symmetry prediction needs a self-adjoint operator".into()));
    }
    let h = s.block().hermitian_part();
    let ev = crate::linalg::hermitian_eigenvalues(&h)?;
    let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = DEFAULT_RANK_TOL * scale;
    let rank = ev.iter().filter(|v| v.abs() > cut).count();
    let semidefinite = ev.iter().all(|&v| v >= -cut) || ev.iter().all(|&v| v <= cut);
    Ok(if rank < p {
        SymmetryPrediction::Symmetric
    } else if rank == p && semidefinite {
        SymmetryPrediction::Asymmetric
    } else {
        SymmetryPrediction::Unknown
    })
}
