//! Seeded random matrices, orthonormal frames and unitaries.

use num_complex::Complex64;

use super::{inner, norm, ComplexMatrix};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// `k` orthonormal columns in `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    vectors: ComplexMatrix,
}

impl Frame {
    pub fn ambient_dim(&self) -> usize {
        self.vectors.rows()
    }

    pub fn len(&self) -> usize {
        self.vectors.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, j: usize) -> Vec<Complex64> {
        self.vectors.column(j)
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn gram(&self) -> ComplexMatrix {
        &self.vectors.adjoint() * &self.vectors
    }
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut g = SplitMix64::new(seed);
    fill_gaussian(rows, cols, &mut g)
}

fn fill_gaussian(rows: usize, cols: usize, g: &mut SplitMix64) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..rows * cols).map(|_| g.complex_normal()).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("sizes match")
}

pub fn random_unit_vector(n: usize, seed: u64) -> Vec<Complex64> {
    let mut g = SplitMix64::new(seed);
    let v: Vec<Complex64> = (0..n).map(|_| g.complex_normal()).collect();
    let s = norm(&v);
    v.into_iter().map(|z| z / s).collect()
}

/// Random `n x n` matrix of rank exactly `r` (almost surely): `X Y*` with Gaussian factors.
pub fn random_rank_r(n: usize, r: usize, seed: u64) -> ComplexMatrix {
    let mut g = SplitMix64::new(seed);
    let x = fill_gaussian(n, r, &mut g);
    let y = fill_gaussian(n, r, &mut g);
    &x * &y.adjoint()
}

/// Orthonormalizes the columns in place with two passes of modified Gram-Schmidt.
fn orthonormalize(m: &mut ComplexMatrix) -> Result<()> {
    let k = m.cols();
    let mut cols: Vec<Vec<Complex64>> = (0..k).map(|j| m.column(j)).collect();
    for j in 0..k {
        for _ in 0..2 {
            for i in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let proj = inner(&rest[0], &done[i]);
                for (a, b) in rest[0].iter_mut().zip(&done[i]) {
                    *a -= proj * b;
                }
            }
        }
        let s = norm(&cols[j]);
        if s < 1e-12 {
            return Err(Error::Numeric("degenerate column during orthogonalization".into()));
        }
        for a in cols[j].iter_mut() {
            *a /= s;
        }
    }
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    Ok(())
}

pub(crate) fn frame_from_rng(n: usize, k: usize, g: &mut SplitMix64) -> Result<Frame> {
    if k > n {
        return Err(Error::Dimension(format!("frame of {k} vectors in dimension {n}")));
    }
    loop {
        let mut m = fill_gaussian(n, k, g);
        // A Gaussian draw is rank-deficient with probability zero; redraw if it happens.
        if orthonormalize(&mut m).is_ok() {
            return Ok(Frame { vectors: m });
        }
    }
}

/// Extends an orthonormal frame to a unitary whose leading columns are the frame.
pub(crate) fn complete_basis(frame: &Frame, g: &mut SplitMix64) -> Result<ComplexMatrix> {
    let (n, k) = (frame.ambient_dim(), frame.len());
    loop {
        let mut m = fill_gaussian(n, n, g);
        for j in 0..k {
            m.set_column(j, &frame.vector(j));
        }
        if orthonormalize(&mut m).is_ok() {
            return Ok(m);
        }
    }
}

/// `k` orthonormal vectors in `C^n`, from a seeded complex Gaussian matrix.
pub fn random_frame(n: usize, k: usize, seed: u64) -> Result<Frame> {
    let mut g = SplitMix64::new(seed);
    frame_from_rng(n, k, &mut g)
}

pub fn random_unitary(n: usize, seed: u64) -> Result<ComplexMatrix> {
    random_frame(n, n, seed).map(|f| f.vectors)
}
