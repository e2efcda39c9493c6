//! Cyclic Jacobi eigensolver for Hermitian matrices.

use num_complex::Complex64;

use super::{ComplexMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
/// Stop once the off-diagonal Frobenius norm is below this fraction of `‖H‖_F`.
const CONVERGENCE_RTOL: f64 = 1e-13;

/// Eigenvalues sorted non-increasing; column `j` of `vectors` belongs to `values[j]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    jacobi(h, false).map(|e| e.values)
}

pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen> {
    jacobi(h, true)
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(h: &ComplexMatrix, want_vectors: bool) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::Shape(format!(
            "eigenvalues of non-square {}x{} matrix",
            h.rows(),
            h.cols()
        )));
    }
    if !h.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::Shape(format!(
            "matrix is not Hermitian (defect {:.3e})",
            h.hermitian_defect()
        )));
    }
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = if want_vectors {
        ComplexMatrix::identity(n)
    } else {
        ComplexMatrix::zeros(0, 0)
    };
    let scale = a.frobenius_norm();
    let target = CONVERGENCE_RTOL * scale;

    let mut converged = scale == 0.0 || off_diagonal_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Rotation in the (p, q) plane: first a phase that makes the
                // pivot real, then a real Givens rotation that annihilates it.
                let phase = apq / r;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                // A <- A G
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * g_pp + aiq * g_qp;
                    a[(i, q)] = aip * g_pq + aiq * g_qq;
                }
                // A <- G* A
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = g_pp.conj() * apj + g_qp.conj() * aqj;
                    a[(q, j)] = g_pq.conj() * apj + g_qq.conj() * aqj;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(app - t * r, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * r, 0.0);

                if want_vectors {
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = vip * g_pp + viq * g_qp;
                        v[(i, q)] = vip * g_pq + viq * g_qq;
                    }
                }
            }
        }
        converged = off_diagonal_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = if want_vectors {
        let mut sorted = ComplexMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            sorted.set_column(dst, &v.column(src));
        }
        sorted
    } else {
        v
    };
    Ok(HermitianEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, random_unitary};

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        random_matrix(n, n, seed).hermitian_part()
    }

    /// Number of eigenvalues strictly below `x`, from the signs of the leading
    /// principal minors of `H - xI` (Sylvester inertia via LDL* without pivoting).
    fn count_below(h: &ComplexMatrix, x: f64) -> usize {
        let n = h.rows();
        let mut m = h.clone();
        for i in 0..n {
            m[(i, i)] -= Complex64::new(x, 0.0);
        }
        let mut count = 0;
        for col in 0..n {
            let mut d = m[(col, col)].re;
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
            for r in (col + 1)..n {
                let f = m[(r, col)] / d;
                for j in (col + 1)..n {
                    let v = m[(col, j)];
                    m[(r, j)] -= f * v;
                }
            }
        }
        count
    }

    /// Eigenvalues by bisection on the inertia count; shares no code with Jacobi.
    fn bisection_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
        let n = h.rows();
        let bound = h.frobenius_norm() + 1.0;
        let mut out = Vec::with_capacity(n);
        // j-th largest eigenvalue: smallest x with count_below(x) >= n - j.
        for j in 0..n {
            let want = n - j;
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(h, mid) >= want {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        out
    }

    #[test]
    fn diagonal_and_swap() {
        let d = ComplexMatrix::diag_real(&[1.0, 3.0]);
        assert_eq!(hermitian_eigenvalues(&d).unwrap(), vec![3.0, 1.0]);
        let s = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let ev = hermitian_eigenvalues(&s).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn matches_bisection_oracle() {
        for seed in 0..5 {
            let h = random_hermitian(6, seed);
            let jac = hermitian_eigenvalues(&h).unwrap();
            let bis = bisection_eigenvalues(&h);
            for (a, b) in jac.iter().zip(&bis) {
                assert!((a - b).abs() < 1e-8, "seed {seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn postconditions() {
        for seed in 0..20 {
            let h = random_hermitian(6, 100 + seed);
            let e = hermitian_eigen(&h).unwrap();
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            let tr = h.trace().unwrap().re;
            let s: f64 = e.values.iter().sum();
            assert!((s - tr).abs() <= 1e-9 * (1.0 + tr.abs()));
            // V* H V is diagonal to working precision.
            let d = &(&e.vectors.adjoint() * &h) * &e.vectors;
            assert!(off_diagonal_norm(&d) <= 1e-12 * h.frobenius_norm());
        }
    }

    #[test]
    fn unitary_invariance() {
        for seed in 0..10 {
            let h = random_hermitian(5, seed);
            let u = random_unitary(5, seed + 50).unwrap();
            let g = &(&u * &h) * &u.adjoint();
            let a = hermitian_eigenvalues(&h).unwrap();
            let b = hermitian_eigenvalues(&g.hermitian_part()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(hermitian_eigenvalues(&a), Err(Error::Shape(_))));
        assert!(hermitian_eigenvalues(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn zero_and_empty() {
        assert_eq!(hermitian_eigenvalues(&ComplexMatrix::zeros(3, 3)).unwrap(), vec![0.0; 3]);
        assert!(hermitian_eigenvalues(&ComplexMatrix::zeros(0, 0)).unwrap().is_empty());
    }
}
