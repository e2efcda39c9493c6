//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use cnrange::coefficients::{AmbientDim, CoefficientVector};
use cnrange::linalg::ComplexMatrix;
use cnrange::rng::SplitMix64;
use num_complex::Complex64;

pub fn cv(v: &[f64]) -> CoefficientVector {
    CoefficientVector::new(v.to_vec()).unwrap()
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Generic weights: `k` uniform draws in `[-2, 2]`, sorted.
pub fn random_c(g: &mut SplitMix64, k: usize) -> CoefficientVector {
    assert!(k >= 2, "weight vectors need at least two entries");
    loop {
        let mut v: Vec<f64> = (0..k).map(|_| g.uniform(-2.0, 2.0)).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        if let Ok(c) = CoefficientVector::new(v) {
            return c;
        }
    }
}

/// Weights whose first `p - 1` pair sums vanish and whose `p`-th does not.
/// When `2(p - 1) = k` every pair sum vanishes instead.
pub fn mirrored_c(g: &mut SplitMix64, k: usize, p: usize) -> CoefficientVector {
    loop {
        let mut top: Vec<f64> = (0..p.saturating_sub(1)).map(|_| g.uniform(0.2, 2.0)).collect();
        top.sort_by(|a, b| b.total_cmp(a));
        let mid_len = k - 2 * top.len();
        let bound = top.last().copied().unwrap_or(2.0);
        let mut mid: Vec<f64> = (0..mid_len).map(|_| g.uniform(-bound, bound)).collect();
        mid.sort_by(|a, b| b.total_cmp(a));
        let mut v = top.clone();
        v.extend(&mid);
        v.extend(top.iter().rev().map(|x| -x));
        if let Ok(c) = CoefficientVector::new(v) {
            let want = if mid_len == 0 { cnrange::RegimeClass::CaseIII } else { cnrange::RegimeClass::CaseII { p } };
            if c.regime() == want {
                return c;
            }
        }
    }
}

/// All pair sums zero.
pub fn antisymmetric_c(g: &mut SplitMix64, k: usize) -> CoefficientVector {
    let mut top: Vec<f64> = (0..k / 2).map(|_| g.uniform(0.2, 2.0)).collect();
    top.sort_by(|a, b| b.total_cmp(a));
    let mut v = top.clone();
    if k % 2 == 1 {
        v.push(0.0);
    }
    v.extend(top.iter().rev().map(|x| -x));
    CoefficientVector::new(v).unwrap()
}

pub fn random_ambient(g: &mut SplitMix64, block: usize, k: usize) -> AmbientDim {
    if g.next_f64() < 0.3 {
        AmbientDim::Infinite
    } else {
        AmbientDim::Finite(block.max(k) + g.range_inclusive(0, 2))
    }
}

pub fn gaussian_matrix(g: &mut SplitMix64, n: usize) -> ComplexMatrix {
    let data = (0..n * n).map(|_| g.complex_normal()).collect();
    ComplexMatrix::from_vec(n, n, data).unwrap()
}

pub fn hermitian(g: &mut SplitMix64, n: usize) -> ComplexMatrix {
    gaussian_matrix(g, n).hermitian_part()
}

pub fn vector(g: &mut SplitMix64, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| g.complex_normal()).collect()
}

/// Self-adjoint `V diag(eigs) V*` for a random unitary `V`.
pub fn hermitian_with_spectrum(g: &mut SplitMix64, eigs: &[f64]) -> ComplexMatrix {
    let n = eigs.len();
    let v = cnrange::linalg::random_unitary(n, g.next_u64()).unwrap();
    &(&v * &ComplexMatrix::diag_real(eigs)) * &v.adjoint()
}
