//! Truncated Fock spaces, ladder operators and quantum states.
//!
//! Multi-mode indices are flattened Alice-major: for dims `[d_a, d_b]` the
//! basis vector `|n, m>` sits at `n * d_b + m`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::Csr;

pub type C64 = Complex64;

/// Default bound on probability mass allowed to fall outside a truncation.
pub const DEFAULT_LEAKAGE_TOLERANCE: f64 = 1e-6;

pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Per-mode truncation dimensions of a product Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeSpace {
    dims: Vec<usize>,
    total: usize,
}

impl ModeSpace {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSpace("no modes".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension(d));
        }
        Ok(ModeSpace { dims: dims.to_vec(), total: dims.iter().product() })
    }

    /// Alice ⊗ Bob.
    pub fn two_mode(dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::new(&[dim_a, dim_b])
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(&[dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn is_two_mode(&self) -> bool {
        self.dims.len() == 2
    }

    fn stride(&self, mode: usize) -> usize {
        self.dims[mode + 1..].iter().product()
    }

    pub fn flatten(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), found: occupations.len() });
        }
        let mut idx = 0;
        for (mode, (&n, &d)) in occupations.iter().zip(&self.dims).enumerate() {
            if n >= d {
                return Err(Error::OutOfTruncation { mode, occupation: n, dim: d });
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    pub fn unflatten(&self, mut index: usize) -> Vec<usize> {
        assert!(index < self.total, "index {index} outside space of dimension {}", self.total);
        let mut occ = vec![0; self.dims.len()];
        for (slot, &d) in occ.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        occ
    }

    /// Occupation of `mode` at flattened `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.dims[mode]
    }
}

/// Dense square complex operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "operators are square");
        Operator { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Operator { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator { matrix: DMatrix::zeros(dim, dim) }
    }

    pub fn from_diagonal(diag: impl IntoIterator<Item = f64>) -> Self {
        let d: Vec<C64> = diag.into_iter().map(|x| C64::new(x, 0.0)).collect();
        Operator { matrix: DMatrix::from_diagonal(&DVector::from_vec(d)) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Operator { matrix: self.matrix.adjoint() }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Operator { matrix: &self.matrix * s }
    }

    pub fn mul(&self, other: &Operator) -> Self {
        Operator { matrix: &self.matrix * &other.matrix }
    }

    pub fn add(&self, other: &Operator) -> Self {
        Operator { matrix: &self.matrix + &other.matrix }
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        Operator { matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix }
    }

    /// Largest elementwise deviation from `M = M^†`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub(crate) fn to_csr(&self) -> Csr {
        Csr::from_dense(&self.matrix)
    }
}

/// Lowering operator `a` with `a|n> = sqrt(n)|n-1>`.
pub fn annihilation_op(dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(Operator::from_matrix(m))
}

pub fn creation_op(dim: usize) -> Result<Operator> {
    annihilation_op(dim).map(|a| a.adjoint())
}

pub fn number_op(dim: usize) -> Operator {
    Operator::from_diagonal((0..dim).map(|n| n as f64))
}

/// Photon-number parity `(-1)^n`.
pub fn parity_op(dim: usize) -> Operator {
    Operator::from_diagonal((0..dim).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }))
}

/// Kronecker product; the first operand is the slow (Alice) index.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator::from_matrix(a.matrix.kronecker(&b.matrix))
}

/// Lift a single-mode operator onto `mode` of `space`.
pub fn embed(op: &Operator, mode: usize, space: &ModeSpace) -> Result<Operator> {
    if mode >= space.num_modes() {
        return Err(Error::InvalidSpace(format!("mode {mode} not in a {}-mode space", space.num_modes())));
    }
    if op.dim() != space.dims()[mode] {
        return Err(Error::DimensionMismatch { expected: space.dims()[mode], found: op.dim() });
    }
    let mut out = Operator::identity(1);
    for (k, &d) in space.dims().iter().enumerate() {
        let factor = if k == mode { op.clone() } else { Operator::identity(d) };
        out = tensor(&out, &factor);
    }
    Ok(out)
}

/// Pure vector or density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    Pure(DVector<C64>),
    Density(DMatrix<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    space: ModeSpace,
    data: StateData,
    leakage: f64,
}

impl QuantumState {
    pub fn from_vector(space: ModeSpace, psi: DVector<C64>) -> Result<Self> {
        if psi.len() != space.total_dim() {
            return Err(Error::DimensionMismatch { expected: space.total_dim(), found: psi.len() });
        }
        Ok(QuantumState { space, data: StateData::Pure(psi), leakage: 0.0 })
    }

    pub fn from_density(space: ModeSpace, rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != space.total_dim() || rho.ncols() != space.total_dim() {
            return Err(Error::DimensionMismatch { expected: space.total_dim(), found: rho.nrows() });
        }
        Ok(QuantumState { space, data: StateData::Density(rho), leakage: 0.0 })
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn with_leakage(mut self, leakage: f64) -> Self {
        self.leakage = leakage.max(0.0);
        self
    }

    pub(crate) fn add_leakage(&mut self, extra: f64) {
        self.leakage += extra.max(0.0);
    }

    pub(crate) fn replace_data(&self, data: StateData) -> Self {
        QuantumState { space: self.space.clone(), data, leakage: self.leakage }
    }

    pub fn vector(&self) -> Option<&DVector<C64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    pub fn density(&self) -> Option<&DMatrix<C64>> {
        match &self.data {
            StateData::Density(m) => Some(m),
            StateData::Pure(_) => None,
        }
    }

    /// Density-matrix form (`|psi><psi|` for pure states).
    pub fn to_density(&self) -> Self {
        let rho = match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Density(m) => m.clone(),
        };
        QuantumState { space: self.space.clone(), data: StateData::Density(rho), leakage: self.leakage }
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Density(m) => m.clone(),
        }
    }

    /// `|psi|^2` for pure states, `Tr rho` for mixed ones.
    pub fn norm_sqr(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared(),
            StateData::Density(m) => m.trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared().powi(2),
            StateData::Density(m) => (m * m).trace().re,
        }
    }

    /// Born-rule probabilities over the flattened basis.
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.data {
            StateData::Pure(v) => v.iter().map(|c| c.norm_sqr()).collect(),
            StateData::Density(m) => (0..m.nrows()).map(|i| m[(i, i)].re).collect(),
        }
    }

    pub fn probability(&self, occupations: &[usize]) -> Result<f64> {
        let i = self.space.flatten(occupations)?;
        Ok(match &self.data {
            StateData::Pure(v) => v[i].norm_sqr(),
            StateData::Density(m) => m[(i, i)].re,
        })
    }

    /// Marginal photon-number distribution of one mode.
    pub fn mode_distribution(&self, mode: usize) -> Vec<f64> {
        let mut dist = vec![0.0; self.space.dims()[mode]];
        for (i, p) in self.probabilities().into_iter().enumerate() {
            dist[self.space.occupation(i, mode)] += p;
        }
        dist
    }

    pub fn mean_photon_number(&self, mode: usize) -> f64 {
        self.mode_distribution(mode).iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// Population of the highest retained Fock level of `mode`.
    pub fn top_level_population(&self, mode: usize) -> f64 {
        *self.mode_distribution(mode).last().unwrap()
    }

    pub fn max_top_level_population(&self) -> f64 {
        (0..self.space.num_modes()).map(|m| self.top_level_population(m)).fold(0.0, f64::max)
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.dim() != self.space.total_dim() {
            return Err(Error::DimensionMismatch { expected: self.space.total_dim(), found: op.dim() });
        }
        Ok(match &self.data {
            StateData::Pure(v) => (v.adjoint() * op.matrix() * v)[(0, 0)],
            StateData::Density(m) => op.matrix().transpose().dot(m),
        })
    }

    /// `U psi` or `U rho U^†`.
    pub fn transform(&self, u: &Operator) -> Result<Self> {
        if u.dim() != self.space.total_dim() {
            return Err(Error::DimensionMismatch { expected: self.space.total_dim(), found: u.dim() });
        }
        Ok(self.transform_csr(&u.to_csr()))
    }

    pub(crate) fn transform_csr(&self, u: &Csr) -> Self {
        let data = match &self.data {
            StateData::Pure(v) => StateData::Pure(u.mul_vec(v)),
            StateData::Density(m) => StateData::Density(u.sandwich(m)),
        };
        self.replace_data(data)
    }

    /// Fidelity `<psi|rho|psi>` against a pure target.
    pub fn fidelity_to_pure(&self, target: &QuantumState) -> Result<f64> {
        let psi = target
            .vector()
            .ok_or_else(|| Error::InvalidSpace("fidelity target must be pure".into()))?;
        if psi.len() != self.space.total_dim() {
            return Err(Error::DimensionMismatch { expected: self.space.total_dim(), found: psi.len() });
        }
        Ok(match &self.data {
            StateData::Pure(v) => psi.dotc(v).norm_sqr(),
            StateData::Density(m) => (psi.adjoint() * m * psi)[(0, 0)].re,
        })
    }

    /// Tensor product `self ⊗ other`; modes are concatenated in order.
    pub fn product(&self, other: &QuantumState) -> Result<Self> {
        let mut dims = self.space.dims().to_vec();
        dims.extend_from_slice(other.space.dims());
        let space = ModeSpace::new(&dims)?;
        let data = match (&self.data, &other.data) {
            (StateData::Pure(a), StateData::Pure(b)) => StateData::Pure(a.kronecker(b)),
            _ => StateData::Density(self.density_matrix().kronecker(&other.density_matrix())),
        };
        Ok(QuantumState { space, data, leakage: self.leakage + other.leakage })
    }
}

/// Unit basis vector `|n_1, n_2, ...>`.
pub fn fock_state(space: &ModeSpace, occupations: &[usize]) -> Result<QuantumState> {
    let idx = space.flatten(occupations)?;
    let mut psi = DVector::zeros(space.total_dim());
    psi[idx] = ONE;
    QuantumState::from_vector(space.clone(), psi)
}

/// Truncated, renormalized coherent state `|alpha>` of one mode.
pub fn coherent_state(dim: usize, alpha: C64) -> Result<QuantumState> {
    coherent_state_with_tolerance(dim, alpha, DEFAULT_LEAKAGE_TOLERANCE)
}

pub fn coherent_state_with_tolerance(dim: usize, alpha: C64, tolerance: f64) -> Result<QuantumState> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut amps = Vec::with_capacity(dim);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let leakage = (1.0 - kept).max(0.0);
    if leakage > tolerance {
        return Err(Error::TruncationTooSmall { leakage, tolerance });
    }
    let psi = DVector::from_vec(amps) / C64::new(kept.sqrt(), 0.0);
    Ok(QuantumState::from_vector(ModeSpace::single(dim)?, psi)?.with_leakage(leakage))
}

/// Reduced density matrix of mode `keep`.
pub fn partial_trace(rho: &QuantumState, keep: usize) -> Result<QuantumState> {
    let m = rho.density().ok_or(Error::NotDensity)?;
    let space = rho.space();
    if keep >= space.num_modes() {
        return Err(Error::InvalidSpace(format!("mode {keep} not in a {}-mode space", space.num_modes())));
    }
    let d = space.dims()[keep];
    let mut out = DMatrix::zeros(d, d);
    let n = space.total_dim();
    // pair indices that agree on every traced-out mode
    let stride = space.stride(keep);
    for i in 0..n {
        let ni = space.occupation(i, keep);
        let base = i - ni * stride;
        for nj in 0..d {
            let j = base + nj * stride;
            out[(ni, nj)] += m[(i, j)];
        }
    }
    Ok(QuantumState::from_density(ModeSpace::single(d)?, out)?.with_leakage(rho.leakage()))
}
