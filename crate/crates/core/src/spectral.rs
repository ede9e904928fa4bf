//! Hermitian eigendecomposition and the spectral propagator `exp(-iHt)`.
//!
//! Generators used here conserve quantities (total photon number for the
//! bilinear coupling, every Fock index for Kerr terms), so the matrix splits
//! into decoupled blocks. Each connected block of the sparsity graph is
//! diagonalized on its own; the result is the same decomposition as a full
//! dense solve at a fraction of the cost.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::sparse::Csr;

/// Connected components of the sparsity graph of `m`, each sorted ascending.
pub(crate) fn blocks(m: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)].norm_sqr() > 0.0 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Eigen-decomposition of a Hermitian matrix: `h = V diag(values) V^†`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

pub fn eigh(h: &DMatrix<Complex64>) -> Eigh {
    let n = h.nrows();
    let mut values = vec![0.0; n];
    let mut vectors = DMatrix::zeros(n, n);
    for block in blocks(h) {
        if block.len() == 1 {
            let i = block[0];
            values[i] = h[(i, i)].re;
            vectors[(i, i)] = Complex64::new(1.0, 0.0);
            continue;
        }
        let k = block.len();
        let sub = DMatrix::from_fn(k, k, |r, c| h[(block[r], block[c])]);
        let sub = (&sub + sub.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sub.symmetric_eigen();
        for c in 0..k {
            // eigenvector c of the block lives in column block[c]
            values[block[c]] = eig.eigenvalues[c];
            for r in 0..k {
                vectors[(block[r], block[c])] = eig.eigenvectors[(r, c)];
            }
        }
    }
    Eigh { values, vectors }
}

impl Eigh {
    /// `V f(diag) V^†`
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for c in 0..n {
            let z = f(self.values[c]);
            for r in 0..n {
                scaled[(r, c)] *= z;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// `exp(-i h t)` for Hermitian `h`, assembled block by block.
pub fn propagator(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let n = h.nrows();
    let mut u = DMatrix::zeros(n, n);
    for block in blocks(h) {
        let k = block.len();
        if k == 1 {
            let i = block[0];
            u[(i, i)] = Complex64::new(0.0, -h[(i, i)].re * t).exp();
            continue;
        }
        let sub = DMatrix::from_fn(k, k, |r, c| h[(block[r], block[c])]);
        let sub = (&sub + sub.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sub.symmetric_eigen();
        let mut scaled = eig.eigenvectors.clone();
        for c in 0..k {
            let z = Complex64::new(0.0, -eig.eigenvalues[c] * t).exp();
            for r in 0..k {
                scaled[(r, c)] *= z;
            }
        }
        let ub = scaled * eig.eigenvectors.adjoint();
        for r in 0..k {
            for c in 0..k {
                u[(block[r], block[c])] = ub[(r, c)];
            }
        }
    }
    u
}

pub(crate) fn propagator_csr(h: &DMatrix<Complex64>, t: f64) -> Csr {
    Csr::from_dense(&propagator(h, t))
}

/// Trace distance `1/2 |a - b|_1` between Hermitian matrices.
pub fn trace_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let diff = a - b;
    let diff = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
    0.5 * diff.symmetric_eigen().eigenvalues.iter().map(|v| v.abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_detection_splits_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_element(3, Complex64::new(1.0, 0.0)));
        assert_eq!(blocks(&m).len(), 3);
        let mut full = m.clone();
        full[(0, 2)] = Complex64::new(0.0, 1.0);
        full[(2, 0)] = Complex64::new(0.0, -1.0);
        assert_eq!(blocks(&full), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn eigh_reconstructs() {
        let mut h = DMatrix::zeros(4, 4);
        h[(0, 0)] = Complex64::new(1.0, 0.0);
        h[(0, 3)] = Complex64::new(0.3, 0.4);
        h[(3, 0)] = Complex64::new(0.3, -0.4);
        h[(1, 2)] = Complex64::new(2.0, 0.0);
        h[(2, 1)] = Complex64::new(2.0, 0.0);
        let e = eigh(&h);
        let back = e.map(|l| Complex64::new(l, 0.0));
        assert!((back - &h).norm() < 1e-12);
    }

    #[test]
    fn zero_time_propagator_is_identity() {
        let mut h = DMatrix::zeros(3, 3);
        h[(0, 1)] = Complex64::new(1.0, 0.0);
        h[(1, 0)] = Complex64::new(1.0, 0.0);
        let u = propagator(&h, 0.0);
        assert!((u - DMatrix::identity(3, 3)).norm() < 1e-14);
    }
}
