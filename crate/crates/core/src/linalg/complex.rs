use super::DenseMatrix;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative pivot threshold below which an LU factorization is declared singular.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// LU factorization with partial pivoting, `P A = L U`, packed in one matrix.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn new(a: &DenseMatrix<Complex64>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Shape(format!("LU needs a square matrix, got {}x{}", n, a.cols())));
        }
        let threshold = PIVOT_THRESHOLD * a.max_abs();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for c in 0..n {
            let (pr, pmag) = (c..n)
                .map(|i| (i, lu[i * n + c].norm()))
                .fold((c, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmag > threshold) {
                return Err(Error::Singular { pivot: pmag, threshold });
            }
            if pr != c {
                for j in 0..n {
                    lu.swap(c * n + j, pr * n + j);
                }
                perm.swap(c, pr);
            }
            let inv = lu[c * n + c].inv();
            for i in c + 1..n {
                let factor = lu[i * n + c] * inv;
                lu[i * n + c] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in c + 1..n {
                    let u = lu[c * n + j];
                    lu[i * n + j] -= factor * u;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side length");
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn lu_solve(a: &DenseMatrix<Complex64>, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if b.len() != a.rows() {
        return Err(Error::Shape(format!("rhs has length {}, matrix has {} rows", b.len(), a.rows())));
    }
    Ok(LuFactors::new(a)?.solve(b))
}

fn to_nalgebra(a: &DenseMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

fn singular_values(a: &DenseMatrix<Complex64>) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    to_nalgebra(a).singular_values().iter().copied().collect()
}

/// Number of singular values above `tol` times the largest one.
pub fn numerical_rank(a: &DenseMatrix<Complex64>, tol: f64) -> usize {
    let sv = singular_values(a);
    let largest = sv.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * largest).count()
}

/// Orthonormal basis of the numerical right null space of `a`.
///
/// The matrix is zero-padded to square so the SVD returns a full set of right
/// singular vectors even when `a` is wide.
pub fn numerical_kernel(a: &DenseMatrix<Complex64>, tol: f64) -> Vec<Vec<Complex64>> {
    let cols = a.cols();
    let size = a.rows().max(cols);
    if cols == 0 {
        return Vec::new();
    }
    let mut padded = DMatrix::<Complex64>::zeros(size, cols);
    for i in 0..a.rows() {
        for j in 0..cols {
            padded[(i, j)] = a.get(i, j);
        }
    }
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
    (0..cols)
        .filter(|&i| largest == 0.0 || svd.singular_values[i] <= tol * largest)
        .map(|i| (0..cols).map(|j| v_t[(i, j)].conj()).collect())
        .collect()
}
