//! Minimal compressed-sparse-row operator used on the hot paths.
//!
//! Ladder operators, Kerr terms and block-diagonal propagators are mostly
//! zeros; the integrators multiply them against dense states and density
//! matrices many thousands of times.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub(crate) struct Csr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl Csr {
    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Csr { n, indptr, indices, values }
    }

    #[cfg(test)]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn mul_vec(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        let mut y = DVector::zeros(self.n);
        for i in 0..self.n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            y[i] = acc;
        }
        y
    }

    /// `self * b`
    pub fn mul_dense(&self, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut c = DMatrix::zeros(self.n, b.ncols());
        self.mul_dense_acc(b, Complex64::new(1.0, 0.0), &mut c);
        c
    }

    /// `c += scale * self * b`
    pub fn mul_dense_acc(&self, b: &DMatrix<Complex64>, scale: Complex64, c: &mut DMatrix<Complex64>) {
        let n = self.n;
        assert_eq!(b.nrows(), n);
        assert_eq!(c.shape(), (n, b.ncols()));
        let bs = b.as_slice();
        let cs = c.as_mut_slice();
        for (bcol, ccol) in bs.chunks_exact(n).zip(cs.chunks_exact_mut(n)) {
            for (i, out) in ccol.iter_mut().enumerate() {
                let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
                let mut acc = Complex64::new(0.0, 0.0);
                for (v, &j) in self.values[lo..hi].iter().zip(&self.indices[lo..hi]) {
                    acc += v * bcol[j];
                }
                *out += scale * acc;
            }
        }
    }

    /// `c += scale * b * self^dagger`
    pub fn dense_mul_adjoint_acc(&self, b: &DMatrix<Complex64>, scale: Complex64, c: &mut DMatrix<Complex64>) {
        // (b A^†)[:, i] = sum_k b[:, k] conj(A[i, k])
        let rows = b.nrows();
        assert_eq!(b.ncols(), self.n);
        assert_eq!(c.shape(), (rows, self.n));
        let bs = b.as_slice();
        let cs = c.as_mut_slice();
        for (i, ccol) in cs.chunks_exact_mut(rows).enumerate() {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let a = scale * self.values[k].conj();
                let col = self.indices[k];
                for (out, &x) in ccol.iter_mut().zip(&bs[col * rows..(col + 1) * rows]) {
                    *out += x * a;
                }
            }
        }
    }

    /// `self * b * self^dagger`
    pub fn sandwich(&self, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let ab = self.mul_dense(b);
        let mut out = DMatrix::zeros(self.n, self.n);
        self.dense_mul_adjoint_acc(&ab, Complex64::new(1.0, 0.0), &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DMatrix<Complex64> {
        DMatrix::from_fn(4, 4, |i, j| {
            if (i + 2 * j) % 3 == 0 {
                Complex64::new(i as f64 + 0.5, j as f64 - 1.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn products_match_dense() {
        let a = sample();
        let b = DMatrix::from_fn(4, 4, |i, j| Complex64::new((i * j) as f64 * 0.3, i as f64 - j as f64));
        let csr = Csr::from_dense(&a);
        assert!(csr.nnz() < 16);
        assert!((csr.mul_dense(&b) - &a * &b).norm() < 1e-12);
        assert!((csr.sandwich(&b) - &a * &b * a.adjoint()).norm() < 1e-12);
        let x = DVector::from_fn(4, |i, _| Complex64::new(i as f64, 1.0));
        assert!((csr.mul_vec(&x) - &a * &x).norm() < 1e-12);
    }
}
