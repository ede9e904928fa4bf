#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qmem::fock::ModeSpace;
use qmem::{QuantumState, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_pair(r: &mut ChaCha8Rng) -> C64 {
    // Box-Muller keeps the test oracle free of extra distribution crates.
    let u1: f64 = r.random::<f64>().max(1e-300);
    let u2: f64 = r.random();
    let rad = (-2.0 * u1.ln()).sqrt();
    C64::from_polar(rad, std::f64::consts::TAU * u2)
}

/// Haar-ish random unit vector of length `n`, zero-padded to `pad`.
pub fn random_vector(r: &mut ChaCha8Rng, n: usize, pad: usize) -> DVector<C64> {
    let mut v = DVector::from_element(pad, C64::new(0.0, 0.0));
    for k in 0..n {
        v[k] = gaussian_pair(r);
    }
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Random mixed state of rank `n` on the first `n` levels of a `pad`-level mode.
pub fn random_density(r: &mut ChaCha8Rng, n: usize, pad: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian_pair(r));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let mut out = DMatrix::zeros(pad, pad);
    out.view_mut((0, 0), (n, n)).copy_from(&(m / C64::new(tr, 0.0)));
    out
}

pub fn single_pure(psi: DVector<C64>) -> QuantumState {
    let d = psi.len();
    QuantumState::from_vector(ModeSpace::single(d).unwrap(), psi).unwrap()
}

pub fn single_mixed(rho: DMatrix<C64>) -> QuantumState {
    let d = rho.nrows();
    QuantumState::from_density(ModeSpace::single(d).unwrap(), rho).unwrap()
}

/// `exp(-i H t)` by scaling and squaring a truncated Taylor series.
pub fn expm_taylor(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let n = h.nrows();
    let a = h * C64::new(0.0, -t);
    let norm: f64 = (0..n).map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let a = a / C64::new(2f64.powi(s), 0.0);
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &a / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn trace_norm_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let d = a - b;
    // Hermitian difference: half the sum of |eigenvalues|
    let herm = (&d + d.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigenvalues();
    0.5 * eig.iter().map(|x| x.abs()).sum::<f64>()
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
