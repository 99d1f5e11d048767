//! Minimal row-major dense matrix used throughout the crate.
//!
//! Entries live in `[0, ∞]` for the path-length kernels (f64 infinity is a
//! first-class value there) and in `[0, ∞)` for the spectral code. Only the
//! operations the crate actually needs are provided.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds from a row-major slice; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        DenseMatrix { rows, cols, data }
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            *yi = acc;
        }
    }

    /// `y = Aᵀ x`
    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(y.len(), self.cols);
        y.fill(0.0);
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (yj, a) in y.iter_mut().zip(row.iter()) {
                *yj += a * xi;
            }
        }
    }

    /// Dense product `self * other` via the f64 gemm kernel.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(m, n);
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                1.0,
                self.data.as_ptr(),
                k as isize,
                1,
                other.data.as_ptr(),
                n as isize,
                1,
                0.0,
                out.data.as_mut_ptr(),
                n as isize,
                1,
            );
        }
        out
    }

    /// `self += alpha * other`, shapes must match.
    pub fn add_scaled(&mut self, alpha: f64, other: &DenseMatrix) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in self.data.iter_mut() {
            *a *= alpha;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn has_negative_entry(&self) -> bool {
        self.data.iter().any(|&v| v < 0.0)
    }

    /// Solves `self * X = rhs` by LU with partial pivoting. `self` is
    /// consumed as the factorization workspace.
    pub fn lu_solve(mut self, mut rhs: DenseMatrix) -> Result<DenseMatrix> {
        if !self.is_square() {
            return Err(Error::Dimension("LU solve needs a square matrix".into()));
        }
        if rhs.rows != self.rows {
            return Err(Error::Dimension(
                "LU solve right-hand side has wrong row count".into(),
            ));
        }
        let n = self.rows;
        let ncols = rhs.cols;
        for k in 0..n {
            // pivot
            let mut p = k;
            let mut pmax = self.get(k, k).abs();
            for i in (k + 1)..n {
                let v = self.get(i, k).abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == 0.0 {
                return Err(Error::Numerical("singular matrix in LU solve".into()));
            }
            if p != k {
                for j in 0..n {
                    let (a, b) = (self.get(k, j), self.get(p, j));
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
                for j in 0..ncols {
                    let (a, b) = (rhs.get(k, j), rhs.get(p, j));
                    rhs.set(k, j, b);
                    rhs.set(p, j, a);
                }
            }
            let pivot = self.get(k, k);
            for i in (k + 1)..n {
                let factor = self.get(i, k) / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.set(i, k, factor);
                for j in (k + 1)..n {
                    let v = self.get(i, j) - factor * self.get(k, j);
                    self.set(i, j, v);
                }
                for j in 0..ncols {
                    let v = rhs.get(i, j) - factor * rhs.get(k, j);
                    rhs.set(i, j, v);
                }
            }
        }
        // back substitution
        for j in 0..ncols {
            for i in (0..n).rev() {
                let mut acc = rhs.get(i, j);
                for l in (i + 1)..n {
                    acc -= self.get(i, l) * rhs.get(l, j);
                }
                rhs.set(i, j, acc / self.get(i, i));
            }
        }
        Ok(rhs)
    }
}

/// Square matrix-vector interface shared by dense and sparse operators.
pub trait MatVec {
    fn dim(&self) -> usize;
    /// `y = M x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// `y = Mᵀ x`
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]);
    fn frobenius_norm(&self) -> f64;
    fn has_negative_entry(&self) -> bool;
    /// Strong connectivity of the positive-entry digraph.
    fn strongly_connected(&self) -> bool;
}

impl MatVec for DenseMatrix {
    fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_transpose(x, y);
    }

    fn frobenius_norm(&self) -> f64 {
        DenseMatrix::frobenius_norm(self)
    }

    fn has_negative_entry(&self) -> bool {
        DenseMatrix::has_negative_entry(self)
    }

    fn strongly_connected(&self) -> bool {
        let n = self.rows;
        crate::multiplex::strongly_connected_from_edges(n, |h, f| {
            for j in 0..n {
                if self.get(h, j) > 0.0 {
                    f(j);
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let b = DenseMatrix::from_vec(2, 2, vec![5.0, 6.0, 7.0, 8.0]);
        let c = a.matmul(&b);
        assert_eq!(c.data(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn matvec_and_transpose() {
        let a = DenseMatrix::from_vec(2, 3, vec![1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        let mut y = vec![0.0; 2];
        a.matvec(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 3.0]);
        let mut z = vec![0.0; 3];
        a.matvec_transpose(&[1.0, 1.0], &mut z);
        assert_eq!(z, vec![1.0, 3.0, 2.0]);
    }

    #[test]
    fn lu_solve_identity_rhs_inverts() {
        let a = DenseMatrix::from_vec(2, 2, vec![4.0, 3.0, 6.0, 3.0]);
        let x = a.clone().lu_solve(DenseMatrix::identity(2)).unwrap();
        let prod = a.matmul(&x);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lu_solve_singular_errors() {
        let a = DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(a.lu_solve(DenseMatrix::identity(2)).is_err());
    }

    #[test]
    fn norms() {
        let a = DenseMatrix::from_vec(2, 2, vec![1.0, -2.0, 3.0, 4.0]);
        assert_eq!(a.one_norm(), 6.0);
        assert_eq!(a.inf_norm(), 7.0);
        assert!((a.frobenius_norm() - 30.0_f64.sqrt()).abs() < 1e-15);
        assert!(a.has_negative_entry());
    }
}
