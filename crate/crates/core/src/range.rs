//! The c-numerical range `W_c(A)`.
//!
//! For a self-adjoint operator the range is an interval whose endpoints are
//! sorted eigenvalue sums. For a general operator the closed convex set is
//! described by its support function `h(θ) = max Re(e^{iθ} z)`, which is the
//! upper endpoint of the range of `Re(e^{iθ} A)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::{pad_to_dimension, AmbientDim, CoefficientVector};
use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::linalg::{hermitian_eigen, rotated_real_part, ComplexMatrix, OperatorModel, HERMITIAN_TOL};

pub const DEFAULT_GRID: usize = 720;
pub const MIN_GRID: usize = 16;
/// Relative width below which a region counts as a segment or a point.
pub const DEGENERACY_RTOL: f64 = 1e-9;
const CONVEXITY_SLACK: f64 = 1e-9;
const GOLDEN_ITERS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::Contract(format!("interval [{lo}, {hi}] is empty")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.lo + self.hi).abs() <= tol * (1.0 + self.lo.abs().max(self.hi.abs()))
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// One extreme of `Σ c_j <H e_j, e_j>` over frames, with the point
/// `Σ c_j <A e_j, e_j>` that the optimal frame produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extreme {
    pub value: f64,
    pub point: Complex64,
}

/// Upper and lower extremes for one Hermitian matrix `H = Re(e^{iθ} A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremePair {
    pub upper: Extreme,
    pub lower: Extreme,
}

struct Eigenpair {
    value: f64,
    vector: Vec<Complex64>,
}

fn eigenpairs(h: &ComplexMatrix) -> Result<Vec<Eigenpair>> {
    let e = hermitian_eigen(h)?;
    Ok(e.values
        .iter()
        .enumerate()
        .map(|(j, &value)| Eigenpair {
            value,
            vector: e.vectors.column(j),
        })
        .collect())
}

/// `h` is the Hermitian matrix that drives the optimization; `a` supplies the
/// boundary point. Both are blocks of the same size.
fn extremes(
    h: &ComplexMatrix,
    a: &ComplexMatrix,
    c: &CoefficientVector,
    ambient: AmbientDim,
) -> Result<ExtremePair> {
    let pairs = eigenpairs(h)?;
    match ambient {
        AmbientDim::Finite(n) => finite_extremes(&pairs, a, c, n),
        AmbientDim::Infinite => Ok(infinite_extremes(&pairs, a, c)),
    }
}

fn finite_extremes(pairs: &[Eigenpair], a: &ComplexMatrix, c: &CoefficientVector, n: usize) -> Result<ExtremePair> {
    let d = pad_to_dimension(c, n)?;
    // Eigenvalues of block ⊕ 0: the block's spectrum plus n - m zeros whose
    // eigenvectors live outside the block and contribute nothing to <Ae, e>.
    let mut slots: Vec<(f64, Option<&[Complex64]>)> =
        pairs.iter().map(|p| (p.value, Some(p.vector.as_slice()))).collect();
    slots.resize(n, (0.0, None));
    slots.sort_by(|x, y| y.0.total_cmp(&x.0));

    let accumulate = |order: &mut dyn Iterator<Item = &(f64, Option<&[Complex64]>)>| {
        let mut value = 0.0;
        let mut point = Complex64::new(0.0, 0.0);
        for (&dj, &(lambda, v)) in d.iter().zip(order) {
            if dj == 0.0 {
                continue;
            }
            value += dj * lambda;
            if let Some(v) = v {
                point += a.quadratic_form(v) * dj;
            }
        }
        Extreme { value, point }
    };
    let upper = accumulate(&mut slots.iter());
    let lower = accumulate(&mut slots.iter().rev());
    Ok(ExtremePair { upper, lower })
}

/// Sup over `l` of `Σ_{j≤l} c_j λ_j(S) − Σ_{j≤k−l} c_{k+1−j} λ_j(−S)` for the
/// zero-tail model, where `λ_j` beyond the listed positive eigenvalues is 0.
///
/// `pos` holds eigenpairs of `S` with positive eigenvalue (descending); `neg`
/// holds eigenpairs of `−S` with positive eigenvalue (descending), i.e. the
/// magnitudes of the negative eigenvalues of `S`. `sign` is +1 for `S` itself
/// and −1 when `S` stands for the negation of the original matrix.
fn zero_tail_sup(pos: &[(f64, &[Complex64])], neg: &[(f64, &[Complex64])], a: &ComplexMatrix, c: &CoefficientVector) -> Extreme {
    let k = c.len();
    let mut best: Option<(f64, usize)> = None;
    for l in 0..=k {
        let up: f64 = (1..=l).map(|j| c.c(j) * pos.get(j - 1).map_or(0.0, |p| p.0)).sum();
        let down: f64 = (1..=k - l).map(|j| c.c(k + 1 - j) * neg.get(j - 1).map_or(0.0, |p| p.0)).sum();
        let v = up - down;
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, l));
        }
    }
    let (value, l) = best.expect("k >= 2");
    let mut point = Complex64::new(0.0, 0.0);
    for j in 1..=l.min(pos.len()) {
        point += a.quadratic_form(pos[j - 1].1) * c.c(j);
    }
    for j in 1..=(k - l).min(neg.len()) {
        point += a.quadratic_form(neg[j - 1].1) * c.c(k + 1 - j);
    }
    Extreme { value, point }
}

fn infinite_extremes(pairs: &[Eigenpair], a: &ComplexMatrix, c: &CoefficientVector) -> ExtremePair {
    let pos: Vec<(f64, &[Complex64])> = pairs
        .iter()
        .filter(|p| p.value > 0.0)
        .map(|p| (p.value, p.vector.as_slice()))
        .collect();
    let neg: Vec<(f64, &[Complex64])> = pairs
        .iter()
        .rev()
        .filter(|p| p.value < 0.0)
        .map(|p| (-p.value, p.vector.as_slice()))
        .collect();
    let upper = zero_tail_sup(&pos, &neg, a, c);
    // m_c(S) = −M_c(−S); the optimal frame is the same, so the point is not negated.
    let flipped = zero_tail_sup(&neg, &pos, a, c);
    ExtremePair {
        upper,
        lower: Extreme {
            value: -flipped.value,
            point: flipped.point,
        },
    }
}

fn hermitian_block(s: &OperatorModel) -> Result<ComplexMatrix> {
    if !s.block().is_hermitian(HERMITIAN_TOL) {
        return Err(Error::Shape(format!(
            "operator is not self-adjoint (defect {:.3e})",
            s.block().hermitian_defect()
        )));
    }
    Ok(s.block().hermitian_part())
}

/// `W_c(S)` for self-adjoint `S` on a finite space: sorted eigenvalue sums
/// against the zero-padded weights.
pub fn selfadjoint_interval(s: &OperatorModel, c: &CoefficientVector) -> Result<Interval> {
    if s.ambient().is_infinite() {
        return Err(Error::Contract("selfadjoint_interval needs a finite ambient space".into()));
    }
    let h = hermitian_block(s)?;
    let e = extremes(&h, &h, c, s.ambient())?;
    Interval::new(e.lower.value, e.upper.value.max(e.lower.value))
}

/// Closure of `W_c(S)` for a finite-rank self-adjoint `S` on an infinite space.
pub fn selfadjoint_interval_infinite(s: &OperatorModel, c: &CoefficientVector) -> Result<Interval> {
    if !s.ambient().is_infinite() {
        return Err(Error::Contract(
            "selfadjoint_interval_infinite needs the infinite zero-tail model".into(),
        ));
    }
    let h = hermitian_block(s)?;
    let e = extremes(&h, &h, c, AmbientDim::Infinite)?;
    Interval::new(e.lower.value, e.upper.value.max(e.lower.value))
}

/// Dispatches on the ambient dimension.
pub fn selfadjoint_range(s: &OperatorModel, c: &CoefficientVector) -> Result<Interval> {
    if s.ambient().is_infinite() {
        selfadjoint_interval_infinite(s, c)
    } else {
        selfadjoint_interval(s, c)
    }
}

/// Both extremes of `W_c(Re(e^{iθ} A))` with their boundary points in `W_c(A)`.
pub fn support_pair(a: &OperatorModel, c: &CoefficientVector, theta: f64) -> Result<ExtremePair> {
    let h = rotated_real_part(a.block(), theta)?;
    extremes(&h, a.block(), c, a.ambient())
}

/// `M_c(Re(e^{iθ} A))`, the support function of `W_c(A)` at angle `θ`.
pub fn support_value(a: &OperatorModel, c: &CoefficientVector, theta: f64) -> Result<f64> {
    support_pair(a, c, theta).map(|p| p.upper.value)
}

pub fn grid_angle(i: usize, n: usize) -> f64 {
    TAU * i as f64 / n as f64
}

/// Sampled support function on the uniform grid `θ_i = 2πi/N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportFunction {
    values: Vec<f64>,
}

impl SupportFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_GRID {
            return Err(Error::Contract(format!(
                "support grid needs at least {MIN_GRID} angles, got {}",
                values.len()
            )));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn angle(&self, i: usize) -> f64 {
        grid_angle(i, self.len())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Intersections of consecutive supporting lines `Re(e^{iθ_i} z) = h_i`.
    pub fn outer_polygon(&self) -> Vec<Complex64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let j = (i + 1) % n;
                let (s1, c1) = self.angle(i).sin_cos();
                let (s2, c2) = self.angle(j).sin_cos();
                let (h1, h2) = (self.values[i], self.values[j]);
                let det = s1 * c2 - c1 * s2;
                let x = (h2 * s1 - h1 * s2) / det;
                let y = (c1 * h2 - c2 * h1) / det;
                Complex64::new(x, y)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionShape {
    Point { at: [f64; 2] },
    Segment { from: [f64; 2], to: [f64; 2] },
    Planar,
}

/// Sampled description of the compact convex set `W_c(A)` (its closure for
/// the infinite model).
#[derive(Debug, Clone, PartialEq)]
pub struct RangeRegion {
    support: SupportFunction,
    lower: Vec<f64>,
    contact: Vec<Complex64>,
    polygon: Vec<Complex64>,
    radius: f64,
    min_width: f64,
    shape: RegionShape,
}

impl RangeRegion {
    pub fn support(&self) -> &SupportFunction {
        &self.support
    }

    pub fn grid_size(&self) -> usize {
        self.support.len()
    }

    /// `m_c(Re(e^{iθ_i} A)) = −h(θ_i + π)` on the same grid.
    pub fn lower_support(&self) -> &[f64] {
        &self.lower
    }

    /// Points of the set on which each supporting line touches it.
    pub fn boundary_points(&self) -> &[Complex64] {
        &self.contact
    }

    /// Circumscribed polygon from consecutive supporting lines; a closed,
    /// clockwise polyline.
    pub fn polyline(&self) -> &[Complex64] {
        &self.polygon
    }

    pub fn shape(&self) -> RegionShape {
        self.shape
    }

    pub fn is_point(&self) -> bool {
        matches!(self.shape, RegionShape::Point { .. })
    }

    pub fn is_degenerate(&self) -> bool {
        !matches!(self.shape, RegionShape::Planar)
    }

    /// Smallest width over all directions, refined between grid angles.
    pub fn min_width(&self) -> f64 {
        self.min_width
    }

    pub fn max_abs_support(&self) -> f64 {
        self.support.max_abs()
    }

    /// Signed doubled area of the circumscribed polygon; positive.
    pub fn polygon_area(&self) -> f64 {
        crate::oracle::polygon_area(&self.polygon)
    }

    /// Polyline convexity: consecutive edge cross products share one sign up
    /// to a slack relative to the region's size.
    pub fn is_convex(&self) -> bool {
        let p = &self.polygon;
        let n = p.len();
        let scale = 1.0 + self.radius;
        let slack = CONVEXITY_SLACK * scale * scale;
        let mut pos = false;
        let mut neg = false;
        for i in 0..n {
            let e1 = p[(i + 1) % n] - p[i];
            let e2 = p[(i + 2) % n] - p[(i + 1) % n];
            let cross = e1.re * e2.im - e1.im * e2.re;
            pos |= cross > slack;
            neg |= cross < -slack;
        }
        !(pos && neg)
    }
}

/// `r_c(A) = sup |z|` over the region.
pub fn radius(region: &RangeRegion) -> f64 {
    region.radius
}

/// True iff `Re(e^{iθ_i} z) ≤ h(θ_i) + tol` at every grid angle.
pub fn contains(region: &RangeRegion, z: Complex64, tol: f64) -> bool {
    let s = &region.support;
    (0..s.len()).all(|i| (Complex64::from_polar(1.0, s.angle(i)) * z).re <= s.values[i] + tol)
}

/// `W = −W` test: `h(θ) = h(θ + π)` on an even grid.
pub fn is_symmetric(region: &RangeRegion, tol: f64) -> Result<bool> {
    let h = region.support.values();
    let n = h.len();
    if !n.is_multiple_of(2) {
        return Err(Error::Contract(format!("symmetry test needs an even grid, got {n}")));
    }
    let bound = tol * (1.0 + region.support.max_abs());
    Ok((0..n).all(|i| (h[i] - h[(i + n / 2) % n]).abs() <= bound))
}

/// Largest support-value gap between two regions on the same grid.
pub fn support_deviation(r1: &RangeRegion, r2: &RangeRegion) -> Result<f64> {
    if r1.grid_size() != r2.grid_size() {
        return Err(Error::Contract(format!(
            "grids differ: {} vs {}",
            r1.grid_size(),
            r2.grid_size()
        )));
    }
    Ok(r1
        .support
        .values()
        .iter()
        .zip(r2.support.values())
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

pub fn regions_equal(r1: &RangeRegion, r2: &RangeRegion, tol: f64) -> Result<bool> {
    let dev = support_deviation(r1, r2)?;
    Ok(dev <= tol * (1.0 + r1.support.max_abs()))
}

/// Golden-section maximization of `f` on `[a, b]`.
fn golden_max(mut a: f64, mut b: f64, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

pub fn boundary(a: &OperatorModel, c: &CoefficientVector, grid: usize) -> Result<RangeRegion> {
    boundary_with(a, c, grid, Execution::default())
}

/// Samples `W_c(A)` on `grid` angles. Grid points are evaluated independently
/// and may run in parallel.
pub fn boundary_with(a: &OperatorModel, c: &CoefficientVector, grid: usize, exec: Execution) -> Result<RangeRegion> {
    if grid < MIN_GRID {
        return Err(Error::Contract(format!(
            "grid size {grid} is below the minimum {MIN_GRID}"
        )));
    }
    if let AmbientDim::Finite(n) = a.ambient() {
        if n < c.len() {
            return Err(Error::Dimension(format!(
                "k = {} exceeds ambient dimension {n}",
                c.len()
            )));
        }
    }
    let pairs: Vec<ExtremePair> = map_indices(grid, exec, |i| support_pair(a, c, grid_angle(i, grid)))
        .into_iter()
        .collect::<Result<_>>()?;

    let support = SupportFunction::new(pairs.iter().map(|p| p.upper.value).collect())?;
    let lower: Vec<f64> = pairs.iter().map(|p| p.lower.value).collect();
    let contact: Vec<Complex64> = pairs.iter().map(|p| p.upper.point).collect();
    let polygon = support.outer_polygon();

    let step = TAU / grid as f64;

    // r_c = max_θ h(θ); refine around the best grid angle.
    let (best, _) = support
        .values()
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let t0 = grid_angle(best, grid);
    let (_, refined) = golden_max(t0 - step, t0 + step, |t| support_value(a, c, t))?;
    let radius = contact
        .iter()
        .map(|z| z.norm())
        .fold(refined.max(0.0), f64::max);

    // Width h(θ) + h(θ + π) = upper − lower, refined around the thinnest grid angle.
    let (thin, _) = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p.upper.value - p.lower.value))
        .fold((0, f64::INFINITY), |acc, (i, w)| if w < acc.1 { (i, w) } else { acc });
    let width_at = |t: f64| -> Result<f64> {
        let p = support_pair(a, c, t)?;
        Ok(p.upper.value - p.lower.value)
    };
    let t_thin = grid_angle(thin, grid);
    let (t_min, neg_w) = golden_max(t_thin - step, t_thin + step, |t| width_at(t).map(|w| -w))?;
    let grid_min = pairs[thin].upper.value - pairs[thin].lower.value;
    let (min_width, min_angle) = if -neg_w < grid_min { (-neg_w, t_min) } else { (grid_min, t_thin) };
    let max_width = pairs
        .iter()
        .map(|p| p.upper.value - p.lower.value)
        .fold(0.0, f64::max);

    let tol = DEGENERACY_RTOL * (1.0 + radius);
    let shape = if max_width <= tol {
        let z = contact[0];
        RegionShape::Point { at: [z.re, z.im] }
    } else if min_width.max(0.0) <= tol {
        // Segment direction is perpendicular to the thin normal e^{-iθ}.
        let dir = Complex64::i() * Complex64::from_polar(1.0, -min_angle);
        let proj = |z: &Complex64| (z * dir.conj()).re;
        let lo = contact.iter().min_by(|x, y| proj(x).total_cmp(&proj(y))).copied().unwrap_or_default();
        let hi = contact.iter().max_by(|x, y| proj(x).total_cmp(&proj(y))).copied().unwrap_or_default();
        RegionShape::Segment {
            from: [lo.re, lo.im],
            to: [hi.re, hi.im],
        }
    } else {
        RegionShape::Planar
    };

    Ok(RangeRegion {
        support,
        lower,
        contact,
        polygon,
        radius,
        min_width,
        shape,
    })
}

/// `r_c(A)` on the default grid.
pub fn numerical_radius(a: &OperatorModel, c: &CoefficientVector) -> Result<f64> {
    boundary(a, c, DEFAULT_GRID).map(|r| radius(&r))
}

/// Angle offset by half a turn, kept in `[0, 2π)`.
pub fn opposite(theta: f64) -> f64 {
    (theta + PI).rem_euclid(TAU)
}
