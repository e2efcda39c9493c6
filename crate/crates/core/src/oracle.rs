//! Independent checks on computed ranges: Monte Carlo frame sampling, hull
//! comparison, and a probe that decides whether an operator has rank one by
//! exhibiting a product whose range is not of rank-one shape.

use num_complex::Complex64;
use serde::Serialize;

use crate::closedform::{is_ellipse, EllipseDescriptor, NON_ELLIPSE_RTOL};
use crate::coefficients::{adjusted, AmbientDim, CoefficientVector};
use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::linalg::{
    complete_basis, frame_from_rng, inner, numerical_rank, rank_one, right_singular_pairs, rotated_real_part,
    ComplexMatrix, Frame, OperatorModel, DEFAULT_RANK_TOL, HERMITIAN_TOL,
};
use crate::range::{boundary, contains, Interval, RangeRegion, RegionShape, DEFAULT_GRID};
use crate::rng::SplitMix64;

/// Containment tolerance for sampled points.
pub const CONTAINMENT_TOL: f64 = 1e-8;
/// Extra zero directions used when sampling the infinite model.
pub const INFINITE_PADDING: usize = 4;
const POLISH_SWEEPS: usize = 100;
/// Relative foci-ratio mismatch above which a region is not of rank-one shape.
const FOCI_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    pub points: Vec<Complex64>,
    pub seed: u64,
}

impl SampleCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `re,im` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im\n");
        for z in &self.points {
            out.push_str(&format!("{:e},{:e}\n", z.re, z.im));
        }
        out
    }
}

/// Dimension in which frames are drawn: the ambient dimension, or block size
/// plus `k + 4` zero directions for the infinite model.
pub fn sampling_dimension(a: &OperatorModel, k: usize) -> usize {
    match a.ambient() {
        AmbientDim::Finite(n) => n,
        AmbientDim::Infinite => a.block_size() + k + INFINITE_PADDING,
    }
}

fn frame_value(block: &ComplexMatrix, c: &CoefficientVector, frame: &Frame) -> Complex64 {
    let m = block.rows();
    (0..c.len())
        .map(|j| block.quadratic_form(&frame.vector(j)[..m]) * c.c(j + 1))
        .sum()
}

fn sample_frame(dim: usize, k: usize, seed: u64, index: usize) -> Result<Frame> {
    let mut g = SplitMix64::stream(seed, index as u64);
    frame_from_rng(dim, k, &mut g)
}

pub fn sample_values(a: &OperatorModel, c: &CoefficientVector, samples: usize, seed: u64) -> Result<SampleCloud> {
    sample_values_with(a, c, samples, seed, Execution::default())
}

/// `samples` values `Σ c_j <A e_j, e_j>` over seeded random orthonormal
/// frames. Sample `i` uses its own stream, so the cloud is the same under any
/// execution mode.
pub fn sample_values_with(
    a: &OperatorModel,
    c: &CoefficientVector,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<SampleCloud> {
    let k = c.len();
    let dim = sampling_dimension(a, k);
    if dim < k {
        return Err(Error::Dimension(format!("k = {k} exceeds ambient dimension {dim}")));
    }
    let points = map_indices(samples, exec, |i| {
        sample_frame(dim, k, seed, i).map(|f| frame_value(a.block(), c, &f))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(SampleCloud { points, seed })
}

/// Raises `Σ w_j <H u_j, u_j>` over unitaries by exact 2×2 rotations in the
/// planes of pairs of basis vectors, starting from `start` (extended to a full
/// basis, with weight 0 on the added vectors). Uses only inner products with
/// `H`, no eigendecomposition.
fn polish(h: &ComplexMatrix, c: &CoefficientVector, start: &Frame, g: &mut SplitMix64) -> Result<f64> {
    let n = start.ambient_dim();
    let m = h.rows();
    let basis = complete_basis(start, g)?;
    let mut u: Vec<Vec<Complex64>> = (0..n).map(|j| basis.column(j)).collect();
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        let mut out = h.mul_vec(&v[..m]);
        out.resize(n, Complex64::new(0.0, 0.0));
        out
    };
    let mut hu: Vec<Vec<Complex64>> = u.iter().map(|v| apply(v)).collect();
    let w: Vec<f64> = (0..n).map(|j| if j < c.len() { c.c(j + 1) } else { 0.0 }).collect();
    let value = |u: &[Vec<Complex64>], hu: &[Vec<Complex64>]| -> f64 {
        (0..n).map(|j| w[j] * inner(&hu[j], &u[j]).re).sum()
    };
    let mut current = value(&u, &hu);
    for _ in 0..POLISH_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                if w[p] == w[q] {
                    continue;
                }
                let alpha = inner(&hu[p], &u[p]).re;
                let delta = inner(&hu[q], &u[q]).re;
                let gamma = inner(&hu[q], &u[p]);
                let mean = (alpha + delta) / 2.0;
                let rad = ((alpha - delta) / 2.0).hypot(gamma.norm());
                let (hi, lo) = (mean + rad, mean - rad);
                let gain = if w[p] > w[q] {
                    w[p] * hi + w[q] * lo - w[p] * alpha - w[q] * delta
                } else {
                    w[p] * lo + w[q] * hi - w[p] * alpha - w[q] * delta
                };
                if !(gain > 0.0) {
                    continue;
                }
                // Eigenvector of [[α, γ], [γ̄, δ]] for the eigenvalue that goes to slot p.
                let lam = if w[p] > w[q] { hi } else { lo };
                let (mut x, mut y) = if (lam - delta).abs() >= (lam - alpha).abs() {
                    (Complex64::new(lam - delta, 0.0), gamma.conj())
                } else {
                    (gamma, Complex64::new(lam - alpha, 0.0))
                };
                let s = (x.norm_sqr() + y.norm_sqr()).sqrt();
                if s == 0.0 {
                    continue;
                }
                x /= s;
                y /= s;
                let rot = |a: &[Complex64], b: &[Complex64]| -> (Vec<Complex64>, Vec<Complex64>) {
                    let first = a.iter().zip(b).map(|(s, t)| x * s + y * t).collect();
                    let second = a.iter().zip(b).map(|(s, t)| -y.conj() * s + x.conj() * t).collect();
                    (first, second)
                };
                let (up, uq) = rot(&u[p], &u[q]);
                let (hp, hq) = rot(&hu[p], &hu[q]);
                u[p] = up;
                u[q] = uq;
                hu[p] = hp;
                hu[q] = hq;
            }
        }
        let next = value(&u, &hu);
        let done = next - current <= 1e-15 * (1.0 + next.abs());
        current = next;
        if done {
            break;
        }
    }
    Ok(current)
}

/// Sampled estimate of `W_c(S)` for self-adjoint `S`: extremes of the frame
/// cloud, with the best frames then improved by pairwise rotations.
pub fn sampled_interval(s: &OperatorModel, c: &CoefficientVector, samples: usize, seed: u64) -> Result<Interval> {
    sampled_interval_with(s, c, samples, seed, Execution::default())
}

pub fn sampled_interval_with(
    s: &OperatorModel,
    c: &CoefficientVector,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Interval> {
    if samples == 0 {
        return Err(Error::Contract("need at least one sample".into()));
    }
    if !s.block().is_hermitian(HERMITIAN_TOL) {
        return Err(Error::Shape("sampled_interval needs a self-adjoint operator".into()));
    }
    let cloud = sample_values_with(s, c, samples, seed, exec)?;
    let (imax, imin) = extreme_indices(&cloud.points, |z| z.re);
    let dim = sampling_dimension(s, c.len());
    let h = s.block().hermitian_part();
    let mut g = SplitMix64::stream(seed, u64::MAX);
    let hi = polish(&h, c, &sample_frame(dim, c.len(), seed, imax)?, &mut g)?;
    let lo = -polish(&-&h, c, &sample_frame(dim, c.len(), seed, imin)?, &mut g)?;
    let raw_hi = cloud.points[imax].re;
    let raw_lo = cloud.points[imin].re;
    Ok(Interval {
        lo: lo.min(raw_lo),
        hi: hi.max(raw_hi),
    })
}

/// Sampled support value at angle `θ`: best cloud point in that direction,
/// then polished.
pub fn sampled_support(a: &OperatorModel, c: &CoefficientVector, theta: f64, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Contract("need at least one sample".into()));
    }
    let cloud = sample_values(a, c, samples, seed)?;
    let rot = Complex64::from_polar(1.0, theta);
    let (imax, _) = extreme_indices(&cloud.points, |z| (rot * z).re);
    let h = rotated_real_part(a.block(), theta)?;
    let mut g = SplitMix64::stream(seed, u64::MAX);
    let dim = sampling_dimension(a, c.len());
    let polished = polish(&h, c, &sample_frame(dim, c.len(), seed, imax)?, &mut g)?;
    Ok(polished.max((rot * cloud.points[imax]).re))
}

fn extreme_indices(points: &[Complex64], key: impl Fn(&Complex64) -> f64) -> (usize, usize) {
    let mut imax = 0;
    let mut imin = 0;
    for (i, z) in points.iter().enumerate() {
        if key(z) > key(&points[imax]) {
            imax = i;
        }
        if key(z) < key(&points[imin]) {
            imin = i;
        }
    }
    (imax, imin)
}

/// Convex hull by monotone chain, counter-clockwise, without collinear points.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut p: Vec<Complex64> = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: Complex64, a: Complex64, b: Complex64| (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re);
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * p.len());
    for &z in &p {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], z) <= 0.0 {
            hull.pop();
        }
        hull.push(z);
    }
    let lower_len = hull.len() + 1;
    for &z in p.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], z) <= 0.0 {
            hull.pop();
        }
        hull.push(z);
    }
    hull.pop();
    hull
}

/// Shoelace area of a closed polygon, orientation ignored.
pub fn polygon_area(p: &[Complex64]) -> f64 {
    let n = p.len();
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (p[i], p[(i + 1) % n]);
        s += a.re * b.im - a.im * b.re;
    }
    (s / 2.0).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HullReport {
    pub containment: bool,
    pub outside: usize,
    /// Largest `Re(e^{iθ} z) − h(θ)` over samples and grid angles.
    pub max_violation: f64,
    /// Hull area over region area; for segments, covered length over length.
    pub coverage: f64,
}

/// Compares a sample cloud with a computed region.
pub fn hull_compare(cloud: &SampleCloud, region: &RangeRegion) -> Result<HullReport> {
    if cloud.is_empty() {
        return Err(Error::Contract("empty sample cloud".into()));
    }
    let s = region.support();
    let angles: Vec<Complex64> = (0..s.len()).map(|i| Complex64::from_polar(1.0, s.angle(i))).collect();
    let mut outside = 0;
    let mut max_violation = f64::NEG_INFINITY;
    for z in &cloud.points {
        let v = angles
            .iter()
            .zip(s.values())
            .map(|(r, h)| (r * z).re - h)
            .fold(f64::NEG_INFINITY, f64::max);
        max_violation = max_violation.max(v);
        if !contains(region, *z, CONTAINMENT_TOL) {
            outside += 1;
        }
    }
    let coverage = match region.shape() {
        RegionShape::Point { .. } => {
            if outside == 0 {
                1.0
            } else {
                0.0
            }
        }
        RegionShape::Segment { from, to } => {
            let (a, b) = (Complex64::new(from[0], from[1]), Complex64::new(to[0], to[1]));
            let len = (b - a).norm();
            if len == 0.0 {
                1.0
            } else {
                let dir = (b - a) / len;
                let proj: Vec<f64> = cloud.points.iter().map(|z| ((z - a) * dir.conj()).re).collect();
                let lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                ((hi - lo) / len).clamp(0.0, 1.0)
            }
        }
        RegionShape::Planar => {
            let area = region.polygon_area();
            if area > 0.0 {
                (polygon_area(&convex_hull(&cloud.points)) / area).clamp(0.0, 1.0)
            } else {
                1.0
            }
        }
    };
    Ok(HullReport {
        containment: outside == 0,
        outside,
        max_violation,
        coverage,
    })
}

/// Whether a region could be `W_c(T)` for some nonzero rank-1 `T`: an
/// elliptical disk or segment with foci `c̄_1 t` and `c̃_k t`. A point is never
/// such a range, because the foci coincide only for `t = 0`, which forces a
/// positive semi-minor axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rank1ShapeCheck {
    pub consistent: bool,
    pub ellipse_residual: f64,
    pub foci_residual: f64,
    pub fit: Option<EllipseDescriptor>,
}

pub fn rank1_shape_check(region: &RangeRegion, c: &CoefficientVector, ambient: AmbientDim) -> Result<Rank1ShapeCheck> {
    if region.is_point() {
        return Ok(Rank1ShapeCheck {
            consistent: false,
            ellipse_residual: 0.0,
            foci_residual: f64::INFINITY,
            fit: None,
        });
    }
    let fit = is_ellipse(region, NON_ELLIPSE_RTOL);
    let adj = adjusted(c, ambient)?;
    let (top, bottom) = (adj.top(), adj.bottom());
    let e = fit.best_fit;
    let denom = top * top + bottom * bottom;
    let mismatch = |fa: Complex64, fb: Complex64| {
        let t = (fa * top + fb * bottom) / denom;
        ((fa - t * top).norm_sqr() + (fb - t * bottom).norm_sqr()).sqrt()
    };
    let foci_residual = mismatch(e.focus1, e.focus2).min(mismatch(e.focus2, e.focus1));
    let scale = 1.0 + region.max_abs_support();
    Ok(Rank1ShapeCheck {
        consistent: fit.is_ellipse && foci_residual <= FOCI_RTOL * scale,
        ellipse_residual: fit.residual,
        foci_residual,
        fit: Some(e),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeCase {
    /// `c_1 + c_k ≠ 0`: `B = x_1⊗Ax_1 − x_2⊗Ax_2`.
    SignedPair,
    /// `c_1 + c_k = 0`, `c_2 + c_{k−1} ≠ 0`: `B = 2 x_1⊗Ax_1 + x_2⊗Ax_2`.
    PositivePair,
    /// Both pair sums vanish, dimension 2: `AB` is the identity on the range.
    Identity,
    /// Both pair sums vanish, dimension ≥ 3: `AB` has a non-elliptic range.
    Skewed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome {
    pub is_rank1: bool,
    pub witness: Option<ComplexMatrix>,
    pub case: Option<ProbeCase>,
    pub check: Option<Rank1ShapeCheck>,
}

/// Decides whether `A ≠ 0` has rank one. For rank ≥ 2 it builds `B` with `AB`
/// having a range that no rank-1 operator has, and verifies that numerically.
pub fn rank1_probe(a: &OperatorModel, c: &CoefficientVector) -> Result<ProbeOutcome> {
    let block = a.block();
    let rank = numerical_rank(block, DEFAULT_RANK_TOL)?;
    if rank == 0 {
        return Err(Error::Contract("rank1_probe needs a nonzero operator".into()));
    }
    if rank == 1 {
        return Ok(ProbeOutcome {
            is_rank1: true,
            witness: None,
            case: None,
            check: None,
        });
    }
    // x_i = v_i / σ_i from the leading right singular pairs, so y_i = A x_i
    // are orthonormal.
    let pairs = right_singular_pairs(block)?;
    let x: Vec<Vec<Complex64>> = pairs[..2]
        .iter()
        .map(|(s, v)| v.iter().map(|z| z / s).collect())
        .collect();
    let y: Vec<Vec<Complex64>> = x.iter().map(|v| block.mul_vec(v)).collect();
    let term = |coef: f64, i: usize, j: usize| rank_one(&x[i], &y[j]).scale_real(coef);

    let dim_two = a.ambient() == AmbientDim::Finite(2);
    let (case, witness) = if c.pair_sum(1) != 0.0 {
        (ProbeCase::SignedPair, &term(1.0, 0, 0) + &term(-1.0, 1, 1))
    } else if c.pair_sum(2) != 0.0 {
        (ProbeCase::PositivePair, &term(2.0, 0, 0) + &term(1.0, 1, 1))
    } else if dim_two {
        (ProbeCase::Identity, &term(1.0, 0, 0) + &term(1.0, 1, 1))
    } else {
        (
            ProbeCase::Skewed,
            &(&term(2.0, 0, 0) + &term(1.0, 1, 0)) + &term(1.0, 1, 1),
        )
    };
    let product = a.with_block(block.matmul(&witness)?)?;
    let region = boundary(&product, c, DEFAULT_GRID)?;
    let check = rank1_shape_check(&region, c, a.ambient())?;
    if check.consistent {
        return Err(Error::InternalInconsistency(format!(
            "rank-{rank} probe witness ({case:?}) produced a rank-1-shaped range: {check:?}"
        )));
    }
    Ok(ProbeOutcome {
        is_rank1: false,
        witness: Some(witness),
        case: Some(case),
        check: Some(check),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, random_rank_r, random_unit_vector};
    use crate::range::selfadjoint_interval;

    fn cv(v: &[f64]) -> CoefficientVector {
        CoefficientVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identity_samples_are_exact() {
        let c = cv(&[2.0, 0.5, -1.0]);
        let a = OperatorModel::finite(ComplexMatrix::identity(4)).unwrap();
        let cloud = sample_values(&a, &c, 200, 1).unwrap();
        assert!(cloud.points.iter().all(|z| (z - Complex64::new(c.sum(), 0.0)).norm() < 1e-12));
    }

    #[test]
    fn diagonal_samples_stay_in_interval() {
        let a = OperatorModel::finite(ComplexMatrix::diag_real(&[3.0, 1.0])).unwrap();
        let cloud = sample_values(&a, &cv(&[2.0, 1.0]), 100_000, 7).unwrap();
        let lo = cloud.points.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let hi = cloud.points.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(lo >= 5.0 - 1e-9 && hi <= 7.0 + 1e-9);
    }

    #[test]
    fn sampling_is_deterministic_across_modes() {
        let a = OperatorModel::finite(random_matrix(3, 3, 2)).unwrap();
        let c = cv(&[1.0, -0.5]);
        let s = sample_values_with(&a, &c, 500, 11, Execution::Sequential).unwrap();
        let p = sample_values_with(&a, &c, 500, 11, Execution::Parallel).unwrap();
        assert_eq!(s, p);
        assert_ne!(s, sample_values(&a, &c, 500, 12).unwrap());
    }

    #[test]
    fn containment_and_shift() {
        let a = OperatorModel::finite(random_matrix(3, 3, 5)).unwrap();
        let c = cv(&[1.0, 0.0]);
        let cloud = sample_values(&a, &c, 10_000, 3).unwrap();
        let region = boundary(&a, &c, DEFAULT_GRID).unwrap();
        let r = hull_compare(&cloud, &region).unwrap();
        assert!(r.containment, "{r:?}");
        assert!(r.coverage > 0.5 && r.coverage <= 1.0);

        let shifted = OperatorModel::finite(a.block() + &ComplexMatrix::identity(3).scale_real(5.0)).unwrap();
        let far = boundary(&shifted, &c, DEFAULT_GRID).unwrap();
        assert!(!hull_compare(&cloud, &far).unwrap().containment);
    }

    #[test]
    fn polishing_reaches_interval() {
        let x = random_matrix(4, 4, 21);
        let h = OperatorModel::finite(x.hermitian_part()).unwrap();
        let c = cv(&[1.5, 0.5, -1.0]);
        let exact = selfadjoint_interval(&h, &c).unwrap();
        let approx = sampled_interval(&h, &c, 2_000, 9).unwrap();
        assert!((exact.lo - approx.lo).abs() < 1e-9, "{exact:?} {approx:?}");
        assert!((exact.hi - approx.hi).abs() < 1e-9, "{exact:?} {approx:?}");
    }

    #[test]
    fn hull_of_square() {
        let pts: Vec<Complex64> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5), (0.5, 0.0)]
            .iter()
            .map(|&(a, b)| Complex64::new(a, b))
            .collect();
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((polygon_area(&h) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn probe_rank_one() {
        let x = random_unit_vector(3, 1);
        let f = random_unit_vector(3, 2);
        let a = OperatorModel::finite(rank_one(&x, &f)).unwrap();
        let out = rank1_probe(&a, &cv(&[2.0, 1.0])).unwrap();
        assert!(out.is_rank1 && out.witness.is_none());
    }

    #[test]
    fn probe_witness_cases() {
        let a = OperatorModel::finite(ComplexMatrix::identity(2)).unwrap();
        let out = rank1_probe(&a, &cv(&[2.0, 1.0])).unwrap();
        assert_eq!(out.case, Some(ProbeCase::SignedPair));
        // AB = y1 y1* − y2 y2* has eigenvalues ±1, so W_c(AB) = [−1, 1].
        let ab = OperatorModel::finite(a.block() * out.witness.as_ref().unwrap()).unwrap();
        let iv = selfadjoint_interval(&ab, &cv(&[2.0, 1.0])).unwrap();
        assert!((iv.lo + 1.0).abs() < 1e-12 && (iv.hi - 1.0).abs() < 1e-12);

        let out = rank1_probe(&a, &cv(&[1.0, -1.0])).unwrap();
        assert_eq!(out.case, Some(ProbeCase::Identity));

        let i3 = OperatorModel::finite(ComplexMatrix::identity(3)).unwrap();
        let out = rank1_probe(&i3, &cv(&[1.0, 0.0, -1.0])).unwrap();
        assert_eq!(out.case, Some(ProbeCase::Skewed));
        assert!(out.check.unwrap().ellipse_residual > NON_ELLIPSE_RTOL);

        let r2 = OperatorModel::new(random_rank_r(4, 2, 3), AmbientDim::Infinite).unwrap();
        let out = rank1_probe(&r2, &cv(&[1.0, 1.0, -1.0])).unwrap();
        assert_eq!(out.case, Some(ProbeCase::PositivePair));
    }

    #[test]
    fn probe_rejects_zero() {
        let z = OperatorModel::finite(ComplexMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(rank1_probe(&z, &cv(&[1.0, 0.0])), Err(Error::Contract(_))));
    }
}
