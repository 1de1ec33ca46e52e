//! Dense row-major matrices and the handful of kernels the crate needs.
//!
//! Parallel kernels split work over output rows only; the accumulation
//! order inside every output element is fixed, so results are bit-identical
//! for any thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.rows != other.rows {
            return Err(Error::Shape(format!(
                "hcat row mismatch: {} vs {}",
                self.rows, other.rows
            )));
        }
        let mut out = Matrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            out.row_mut(r)[..self.cols].copy_from_slice(self.row(r));
            out.row_mut(r)[self.cols..].copy_from_slice(other.row(r));
        }
        Ok(out)
    }

    /// Column slice `self[:, lo..hi]` as a new matrix.
    pub fn col_slice(&self, lo: usize, hi: usize) -> Matrix<T> {
        assert!(lo <= hi && hi <= self.cols);
        let mut out = Matrix::zeros(self.rows, hi - lo);
        for r in 0..self.rows {
            out.row_mut(r).copy_from_slice(&self.row(r)[lo..hi]);
        }
        out
    }
}

/// `a (m x k) * b^T (k x n)` where `b` is stored `n x k`. This is the affine
/// layout used by dense layers (`b` holds one output unit per row).
pub fn mul_nt<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    assert_eq!(a.cols(), b.cols(), "mul_nt inner dimension");
    let (m, n, k) = (a.rows(), b.rows(), a.cols());
    let mut out = Matrix::zeros(m, n);
    out.data
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(r, out_row)| {
            let ar = a.row(r);
            for (j, o) in out_row.iter_mut().enumerate() {
                let br = b.row(j);
                let mut acc = T::zero();
                for i in 0..k {
                    acc += ar[i] * br[i];
                }
                *o = acc;
            }
        });
    out
}

/// `a^T (k x m) * b (k x n)` where both are stored `k x rows`; used for
/// weight gradients (`delta^T * input`) and Gram matrices (`z^T z`).
pub fn mul_tn<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    assert_eq!(a.rows(), b.rows(), "mul_tn outer dimension");
    let (m, n, k) = (a.cols(), b.cols(), a.rows());
    let mut out = Matrix::zeros(m, n);
    out.data
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, out_row)| {
            for r in 0..k {
                let av = a.get(r, i);
                let br = b.row(r);
                for (j, o) in out_row.iter_mut().enumerate() {
                    *o += av * br[j];
                }
            }
        });
    out
}

/// Plain `a (m x k) * b (k x n)`; used for input gradients (`delta * W`).
pub fn mul_nn<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    assert_eq!(a.cols(), b.rows(), "mul_nn inner dimension");
    let (m, n, k) = (a.rows(), b.cols(), a.cols());
    let mut out = Matrix::zeros(m, n);
    out.data
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(r, out_row)| {
            let ar = a.row(r);
            for i in 0..k {
                let av = ar[i];
                let br = b.row(i);
                for (j, o) in out_row.iter_mut().enumerate() {
                    *o += av * br[j];
                }
            }
        });
    out
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// Fails on a non-positive pivot; callers handle jitter escalation.
pub fn cholesky_lower<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    if a.rows() != a.cols() {
        return Err(Error::Shape(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for p in 0..j {
                sum -= l.get(i, p) * l.get(j, p);
            }
            if i == j {
                if sum <= T::zero() || !sum.is_finite() {
                    return Err(Error::Conditioning(format!(
                        "non-positive pivot {sum} at row {i}"
                    )));
                }
                l.set(i, j, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// `l * l^T` for a square factor; used to verify reconstructions.
pub fn factor_times_transpose<T: Scalar>(l: &Matrix<T>) -> Matrix<T> {
    mul_nt(l, l)
}

/// `l * g` for a lower-triangular `n x n` factor and a vector `g`.
pub fn tri_mul_vec<T: Scalar>(l: &Matrix<T>, g: &[T]) -> Vec<T> {
    let n = l.rows();
    assert_eq!(g.len(), n);
    let mut out = vec![T::zero(); n];
    for (i, o) in out.iter_mut().enumerate() {
        let row = l.row(i);
        let mut acc = T::zero();
        for j in 0..=i {
            acc += row[j] * g[j];
        }
        *o = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> Matrix<f64> {
        Matrix::from_vec(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn mul_nt_matches_hand_product() {
        // a = [[1,2],[3,4]], b rows are output units: b = [[5,6],[7,8]]
        // out[r][j] = a[r] . b[j]
        let a = m(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = m(2, 2, &[5.0, 6.0, 7.0, 8.0]);
        let out = mul_nt(&a, &b);
        assert_eq!(out.data(), &[17.0, 23.0, 39.0, 53.0]);
    }

    #[test]
    fn mul_tn_matches_hand_product() {
        let a = m(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = m(2, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, 1.0]);
        // a^T b = [[1,3],[2,4]] * [[1,0,2],[0,1,1]]
        let out = mul_tn(&a, &b);
        assert_eq!(out.data(), &[1.0, 3.0, 5.0, 2.0, 4.0, 8.0]);
    }

    #[test]
    fn mul_nn_matches_hand_product() {
        let a = m(1, 2, &[2.0, 3.0]);
        let b = m(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let out = mul_nn(&a, &b);
        assert_eq!(out.data(), &[11.0, 16.0]);
    }

    #[test]
    fn products_are_thread_count_invariant() {
        let mut rng = crate::rng::Rng::new(99);
        let a = Matrix::from_vec(17, 13, rng.standard_normal_vec(17 * 13)).unwrap();
        let b = Matrix::from_vec(11, 13, rng.standard_normal_vec(11 * 13)).unwrap();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| mul_nt(&a, &b));
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| mul_nt(&a, &b));
        assert_eq!(serial.data(), parallel.data());
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = m(3, 3, &[4.0, 2.0, 0.4, 2.0, 3.0, 0.1, 0.4, 0.1, 1.5]);
        let l = cholesky_lower(&a).unwrap();
        let back = factor_times_transpose(&l);
        for i in 0..9 {
            assert!((back.data()[i] - a.data()[i]).abs() < 1e-12);
        }
        // strictly lower triangular
        assert_eq!(l.get(0, 1), 0.0);
        assert_eq!(l.get(0, 2), 0.0);
        assert_eq!(l.get(1, 2), 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = m(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(cholesky_lower(&a), Err(Error::Conditioning(_))));
    }

    #[test]
    fn tri_mul_vec_identity() {
        let l = m(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(tri_mul_vec(&l, &[3.0, 4.0]), vec![3.0, 4.0]);
    }
}
