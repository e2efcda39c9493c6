//! Dense complex matrices and the operator model they represent.

mod eigen;
mod io;
mod random;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen, MAX_SWEEPS};
pub use io::{matrix_from_csv, matrix_from_json, matrix_to_csv, matrix_to_json, MatrixJson};
pub use random::{random_frame, random_matrix, random_rank_r, random_unit_vector, random_unitary, Frame};
pub(crate) use random::{complete_basis, frame_from_rng};

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::coefficients::AmbientDim;
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Real matrix from nested rows; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[Complex64]) {
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `<A v, v>` for a square matrix.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Complex64 {
        inner(&self.mul_vec(v), v)
    }

    pub fn trace(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "trace of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok((0..self.rows).map(|i| self[(i, i)]).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `|A - A*|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol * self.max_abs().max(1.0)
    }

    /// `(A + A*) / 2`, Hermitian by construction.
    pub fn hermitian_part(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            out[(i, i)] = Complex64::new(self[(i, i)].re, 0.0);
            for j in (i + 1)..self.cols {
                let z = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        out
    }

    /// `A ⊕ 0` padded with zeros to `n x n`.
    pub fn pad_to(&self, n: usize) -> Result<Self> {
        if !self.is_square() || n < self.rows {
            return Err(Error::Dimension(format!(
                "cannot embed {}x{} block in dimension {n}",
                self.rows, self.cols
            )));
        }
        let mut out = Self::zeros(n, n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        Ok(out)
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)];
            }
        }
        out
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::Shape("determinant of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .unwrap_or(col);
            if a[(pivot, col)].norm() == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for r in (col + 1)..n {
                let f = a[(r, col)] / p;
                for j in col..n {
                    let v = a[(col, j)];
                    a[(r, j)] -= f * v;
                }
            }
        }
        Ok(det)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

fn zip_with(a: &ComplexMatrix, b: &ComplexMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> ComplexMatrix {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols), "shape mismatch");
    ComplexMatrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in product")
    }
}

/// `<x, y> = sum x_i conj(y_i)`, linear in the first argument.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// The rank-one operator `x ⊗ f = x f*`, so that `(x ⊗ f) z = <z, f> x`.
pub fn rank_one(x: &[Complex64], f: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(x.len(), f.len(), |i, j| x[i] * f[j].conj())
}

/// `(e^{iθ} A + e^{-iθ} A*) / 2`, symmetrized so the result is exactly Hermitian.
pub fn rotated_real_part(a: &ComplexMatrix, theta: f64) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "rotated real part of non-square {}x{} matrix",
            a.rows, a.cols
        )));
    }
    Ok(a.scale(Complex64::from_polar(1.0, theta)).hermitian_part())
}

/// Singular values in non-increasing order.
///
/// Computed as the non-negative eigenvalues of the Hermitian dilation
/// `[[0, A], [A*, 0]]`, which keeps absolute accuracy near zero (the route
/// through `A*A` would square the rounding floor).
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let (m, n) = (a.rows, a.cols);
    let mut dil = ComplexMatrix::zeros(m + n, m + n);
    for i in 0..m {
        for j in 0..n {
            dil[(i, m + j)] = a[(i, j)];
            dil[(m + j, i)] = a[(i, j)].conj();
        }
    }
    let ev = hermitian_eigenvalues(&dil)?;
    Ok(ev.into_iter().take(m.min(n)).map(|x| x.max(0.0)).collect())
}

/// `sqrt(λ_max(A* A))`.
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    if a.rows == 0 || a.cols == 0 {
        return Ok(0.0);
    }
    let gram = (&a.adjoint() * a).hermitian_part();
    let ev = hermitian_eigenvalues(&gram)?;
    Ok(ev[0].max(0.0).sqrt())
}

/// Number of singular values above `tol * σ_max`.
pub fn numerical_rank(a: &ComplexMatrix, tol: f64) -> Result<usize> {
    let sv = singular_values(a)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * smax).count())
}

/// Right singular vectors of `A`, ordered by non-increasing singular value.
///
/// Returned as `(σ_j, v_j)` with `A* A v_j = σ_j^2 v_j`.
pub fn right_singular_pairs(a: &ComplexMatrix) -> Result<Vec<(f64, Vec<Complex64>)>> {
    let gram = (&a.adjoint() * a).hermitian_part();
    let eig = hermitian_eigen(&gram)?;
    Ok(eig
        .values
        .iter()
        .enumerate()
        .map(|(j, &l)| (l.max(0.0).sqrt(), eig.vectors.column(j)))
        .collect())
}

/// A finite block on an ambient space: `block ⊕ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorModel {
    block: ComplexMatrix,
    ambient: AmbientDim,
}

impl OperatorModel {
    pub fn new(block: ComplexMatrix, ambient: AmbientDim) -> Result<Self> {
        if !block.is_square() {
            return Err(Error::Shape(format!(
                "operator block must be square, got {}x{}",
                block.rows, block.cols
            )));
        }
        if let AmbientDim::Finite(n) = ambient {
            if n < block.rows {
                return Err(Error::Dimension(format!(
                    "block of size {} does not fit ambient dimension {n}",
                    block.rows
                )));
            }
        }
        Ok(Self { block, ambient })
    }

    /// The block taken as the whole space.
    pub fn finite(block: ComplexMatrix) -> Result<Self> {
        let n = block.rows;
        Self::new(block, AmbientDim::Finite(n))
    }

    pub fn infinite(block: ComplexMatrix) -> Result<Self> {
        Self::new(block, AmbientDim::Infinite)
    }

    pub fn block(&self) -> &ComplexMatrix {
        &self.block
    }

    pub fn ambient(&self) -> AmbientDim {
        self.ambient
    }

    pub fn block_size(&self) -> usize {
        self.block.rows
    }

    pub fn with_block(&self, block: ComplexMatrix) -> Result<Self> {
        Self::new(block, self.ambient)
    }

    /// Full matrix on the finite ambient space, or on `block + extra` dimensions
    /// for the infinite model.
    pub fn materialize(&self, infinite_extra: usize) -> Result<ComplexMatrix> {
        match self.ambient {
            AmbientDim::Finite(n) => self.block.pad_to(n),
            AmbientDim::Infinite => self.block.pad_to(self.block.rows + infinite_extra),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rotated_real_part_examples() {
        let h = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(2.0, 0.0),
            (1, 1) => c(-1.0, 0.0),
            (0, 1) => c(0.5, 0.25),
            _ => c(0.5, -0.25),
        });
        assert_eq!(rotated_real_part(&h, 0.0).unwrap(), h);

        let n = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = rotated_real_part(&n, 0.0).unwrap();
        assert_eq!(r, ComplexMatrix::from_real_rows(&[&[0.0, 0.5], &[0.5, 0.0]]));

        let a = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64 - 2.0 * j as f64, (i * j) as f64 + 0.5));
        let t = 0.7;
        let r1 = rotated_real_part(&a, t).unwrap();
        let r2 = rotated_real_part(&a, t + std::f64::consts::PI).unwrap();
        assert!((&r1 + &r2).max_abs() < 1e-14);

        assert!(rotated_real_part(&ComplexMatrix::zeros(2, 3), 0.0).is_err());
    }

    #[test]
    fn norm_trace_rank_examples() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]);
        assert!((operator_norm(&a).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(a.trace().unwrap(), c(0.0, 0.0));
        assert_eq!(numerical_rank(&a, DEFAULT_RANK_TOL).unwrap(), 1);

        let i3 = ComplexMatrix::identity(3);
        assert!((operator_norm(&i3).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(i3.trace().unwrap(), c(3.0, 0.0));
        assert_eq!(numerical_rank(&i3, DEFAULT_RANK_TOL).unwrap(), 3);

        assert!(ComplexMatrix::zeros(2, 3).trace().is_err());
        assert_eq!(numerical_rank(&ComplexMatrix::zeros(3, 3), DEFAULT_RANK_TOL).unwrap(), 0);
    }

    #[test]
    fn scaled_outer_product_norm_matches_power_iteration() {
        let x = random_unit_vector(5, 3);
        let y = random_unit_vector(5, 4);
        let a = rank_one(&x, &y).scale_real(5.0);
        assert!((operator_norm(&a).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(numerical_rank(&a, DEFAULT_RANK_TOL).unwrap(), 1);

        // Independent check: power iteration on A*A without any eigensolver.
        let ata = &a.adjoint() * &a;
        let mut v = random_unit_vector(5, 99);
        let mut lambda = 0.0;
        for _ in 0..200 {
            let w = ata.mul_vec(&v);
            lambda = norm(&w);
            v = w.iter().map(|z| z / lambda).collect();
        }
        assert!((lambda.sqrt() - 5.0).abs() < 1e-10);
    }

    #[test]
    fn rank_one_convention() {
        let x = vec![c(1.0, 0.0), c(0.0, 1.0)];
        let f = vec![c(0.5, 0.5), c(2.0, 0.0)];
        let t = rank_one(&x, &f);
        // tr(x ⊗ f) = <x, f>
        assert!((t.trace().unwrap() - inner(&x, &f)).norm() < 1e-15);
        let z = vec![c(0.3, -1.0), c(1.0, 2.0)];
        let tz = t.mul_vec(&z);
        let s = inner(&z, &f);
        assert!((tz[0] - s * x[0]).norm() < 1e-14 && (tz[1] - s * x[1]).norm() < 1e-14);
    }

    #[test]
    fn determinant_of_permutation() {
        let p = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!((p.determinant().unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn operator_model_checks() {
        let b = ComplexMatrix::identity(3);
        assert!(OperatorModel::new(b.clone(), AmbientDim::Finite(2)).is_err());
        assert!(OperatorModel::new(ComplexMatrix::zeros(2, 3), AmbientDim::Infinite).is_err());
        let m = OperatorModel::new(b, AmbientDim::Finite(5)).unwrap();
        assert_eq!(m.materialize(0).unwrap().rows(), 5);
    }
}
