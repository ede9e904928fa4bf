//! Effective Hamiltonians and time evolution.
//!
//! Forward evolution is `exp(-iHt)` with `H` in rad/µs. A beamsplitter with
//! `φ = 0` therefore maps `|1,0>` to `cos θ |1,0> - i sin θ |0,1>`.
//!
//! Open-system evolution integrates
//! `dρ/dt = -i[H, ρ] + Σ_k r_k (L_k ρ L_k^† - {L_k^† L_k, ρ}/2)`
//! with fixed-step RK4.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{annihilation_op, embed, number_op, tensor, ModeSpace, Operator, QuantumState, StateData, C64};
use crate::sparse::Csr;
use crate::spectral;

const TWO_PI: f64 = 2.0 * PI;

/// `scale * matrix`, Hermitian, in rad/µs.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerm {
    label: String,
    matrix: Operator,
    scale: f64,
}

impl HamiltonianTerm {
    pub fn new(label: impl Into<String>, matrix: Operator, scale: f64) -> Result<Self> {
        let label = label.into();
        if !matrix.is_hermitian(1e-12) {
            return Err(Error::InvalidHamiltonian(label));
        }
        Ok(HamiltonianTerm { label, matrix, scale })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        HamiltonianTerm { label: self.label.clone(), matrix: self.matrix.clone(), scale: self.scale * factor }
    }

    /// `scale * matrix` as a dense matrix.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        self.matrix.matrix() * C64::new(self.scale, 0.0)
    }
}

fn require_two_mode(space: &ModeSpace) -> Result<()> {
    if space.is_two_mode() {
        Ok(())
    } else {
        Err(Error::InvalidSpace(format!("expected two modes, found {}", space.num_modes())))
    }
}

/// `2πg (e^{iφ} a b^† + e^{-iφ} a^† b)`.
pub fn bilinear_hamiltonian(space: &ModeSpace, g: f64, phi: f64) -> Result<HamiltonianTerm> {
    require_two_mode(space)?;
    // a ⊗ b^† directly; the product of embedded operators is a dense O(n³) matmul.
    let a = annihilation_op(space.dims()[0])?;
    let b = annihilation_op(space.dims()[1])?;
    let ab_dag = tensor(&a, &b.adjoint()).scaled(C64::from_polar(1.0, phi));
    let gen = ab_dag.add(&ab_dag.adjoint());
    HamiltonianTerm::new("bilinear", gen, TWO_PI * g)
}

/// `-2π [ χ_aa/2 n_a(n_a-1) + χ_bb/2 n_b(n_b-1) + χ_ab n_a n_b ]`, diagonal.
pub fn kerr_hamiltonian(space: &ModeSpace, chi_aa: f64, chi_bb: f64, chi_ab: f64) -> Result<HamiltonianTerm> {
    require_two_mode(space)?;
    let diag = (0..space.total_dim()).map(|i| {
        let na = space.occupation(i, 0) as f64;
        let nb = space.occupation(i, 1) as f64;
        0.5 * chi_aa * na * (na - 1.0) + 0.5 * chi_bb * nb * (nb - 1.0) + chi_ab * na * nb
    });
    HamiltonianTerm::new("kerr", Operator::from_diagonal(diag), -TWO_PI)
}

/// `-2π f n_mode`; evolving for `t` imprints `e^{i 2π f t n}`.
pub fn number_phase_term(space: &ModeSpace, mode: usize, f: f64) -> Result<HamiltonianTerm> {
    let n = embed(&number_op(space.dims()[mode]), mode, space)?;
    HamiltonianTerm::new("number-phase", n, -TWO_PI * f)
}

fn sum_terms(terms: &[HamiltonianTerm], dim: usize) -> Result<DMatrix<C64>> {
    let mut h = DMatrix::zeros(dim, dim);
    for t in terms {
        if t.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: t.dim() });
        }
        h += t.to_matrix();
    }
    Ok(h)
}

fn check_hermitian(h: &DMatrix<C64>, scale: f64) -> Result<()> {
    let op = Operator::from_matrix(h.clone());
    if op.hermiticity_error() > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidHamiltonian("sum".into()));
    }
    Ok(())
}

/// Max absolute row sum; bounds the spectral norm of a Hermitian matrix.
pub(crate) fn row_sum_norm(h: &DMatrix<C64>) -> f64 {
    (0..h.nrows()).map(|i| h.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(-i H t)` applied to the state, `H = Σ terms`.
pub fn propagate_unitary(state: &QuantumState, terms: &[HamiltonianTerm], t: f64) -> Result<QuantumState> {
    if !(t >= 0.0) {
        return Err(Error::InvalidTime(format!("negative duration {t}")));
    }
    let dim = state.space().total_dim();
    let h = sum_terms(terms, dim)?;
    check_hermitian(&h, row_sum_norm(&h))?;
    if t == 0.0 || terms.is_empty() {
        return Ok(state.clone());
    }
    let u = spectral::propagator_csr(&h, t);
    Ok(state.transform_csr(&u))
}

/// Dense `exp(-i H t)`.
pub fn unitary_operator(terms: &[HamiltonianTerm], dim: usize, t: f64) -> Result<Operator> {
    let h = sum_terms(terms, dim)?;
    check_hermitian(&h, row_sum_norm(&h))?;
    Ok(Operator::from_matrix(spectral::propagator(&h, t)))
}

/// Drive envelope with cosine ring-up and ring-down around a flat plateau.
///
/// Total length is `plateau + 2 ring`; each ramp integrates to `ring / 2`, so
/// the area under a unit-height envelope is `plateau + ring`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub plateau: f64,
    pub ring: f64,
}

impl Envelope {
    pub fn square(duration: f64) -> Self {
        Envelope { plateau: duration, ring: 0.0 }
    }

    /// Envelope whose area equals `area`, using ramps of `ring` when the
    /// area allows and shorter ramps otherwise.
    pub fn with_area(area: f64, ring: f64) -> Self {
        let area = area.max(0.0);
        if area >= ring {
            Envelope { plateau: area - ring, ring }
        } else {
            Envelope { plateau: 0.0, ring: area }
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.plateau + 2.0 * self.ring
    }

    pub fn integral(&self) -> f64 {
        self.plateau + self.ring
    }

    pub fn value(&self, t: f64) -> f64 {
        let r = self.ring;
        if t < 0.0 || t > self.total_duration() {
            0.0
        } else if t < r {
            0.5 * (1.0 - (PI * t / r).cos())
        } else if t <= r + self.plateau {
            1.0
        } else {
            let tau = self.total_duration() - t;
            0.5 * (1.0 - (PI * tau / r).cos())
        }
    }

    /// Exact ramp integral over `[t0, t1]` within the ring-up.
    fn ramp_area(&self, t0: f64, t1: f64) -> f64 {
        let r = self.ring;
        0.5 * (t1 - t0) - r / (2.0 * PI) * ((PI * t1 / r).sin() - (PI * t0 / r).sin())
    }

    /// Piecewise-constant `(height, duration)` segments; heights are
    /// sub-interval averages so the total area is exact.
    pub fn segments(&self, per_ramp: usize) -> Vec<(f64, f64)> {
        let per_ramp = per_ramp.max(1);
        let mut up = Vec::new();
        if self.ring > 0.0 {
            let h = self.ring / per_ramp as f64;
            for k in 0..per_ramp {
                let (t0, t1) = (k as f64 * h, (k + 1) as f64 * h);
                up.push((self.ramp_area(t0, t1) / h, h));
            }
        }
        let mut out = up.clone();
        if self.plateau > 0.0 {
            out.push((1.0, self.plateau));
        }
        out.extend(up.into_iter().rev());
        out
    }
}

pub const DEFAULT_SEGMENTS_PER_RAMP: usize = 64;

/// Mixing angle `θ = 2π g ∫ envelope`.
pub fn effective_theta(g: f64, env: &Envelope) -> f64 {
    TWO_PI * g * env.integral()
}

/// Unitary evolution under `drive(t) · H_drive + H_static` for an envelope.
pub fn propagate_envelope(
    state: &QuantumState,
    drive: &[HamiltonianTerm],
    fixed: &[HamiltonianTerm],
    env: &Envelope,
    per_ramp: usize,
) -> Result<QuantumState> {
    let dim = state.space().total_dim();
    let hd = sum_terms(drive, dim)?;
    let hs = sum_terms(fixed, dim)?;
    check_hermitian(&hd, row_sum_norm(&hd))?;
    check_hermitian(&hs, row_sum_norm(&hs))?;
    let mut out = state.clone();
    for (height, dt) in env.segments(per_ramp) {
        let h = &hd * C64::new(height, 0.0) + &hs;
        out = out.transform_csr(&spectral::propagator_csr(&h, dt));
    }
    Ok(out)
}

/// Collapse operator with rate (1/µs).
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseChannel {
    pub label: String,
    pub operator: Operator,
    pub rate: f64,
}

impl CollapseChannel {
    pub fn new(label: impl Into<String>, operator: Operator, rate: f64) -> Result<Self> {
        let label = label.into();
        if !(rate >= 0.0) {
            return Err(Error::InvalidParams(format!("channel {label} has negative rate {rate}")));
        }
        Ok(CollapseChannel { label, operator, rate })
    }
}

/// Photon loss on `mode`, rate `1/T1`.
pub fn loss_channel(space: &ModeSpace, mode: usize, t1: f64) -> Result<CollapseChannel> {
    let a = embed(&annihilation_op(space.dims()[mode])?, mode, space)?;
    CollapseChannel::new(format!("loss-{mode}"), a, 1.0 / t1)
}

/// Pure dephasing on `mode` with `L = n` and rate `2/T_phi`, so the
/// `|0><1|` coherence decays as `exp(-t/T_phi)`.
pub fn dephasing_channel(space: &ModeSpace, mode: usize, tphi: f64) -> Result<CollapseChannel> {
    let n = embed(&number_op(space.dims()[mode]), mode, space)?;
    CollapseChannel::new(format!("dephasing-{mode}"), n, 2.0 / tphi)
}

/// Dissipative part shared by every stretch of one integration.
struct Dissipator {
    /// `-(i/2) Σ r L^† L`
    anti: DMatrix<C64>,
    jumps: Vec<(Csr, f64)>,
}

impl Dissipator {
    fn new(dim: usize, channels: &[CollapseChannel]) -> Self {
        let mut anti = DMatrix::zeros(dim, dim);
        let mut jumps = Vec::new();
        for ch in channels {
            if ch.rate == 0.0 {
                continue;
            }
            let l = ch.operator.matrix();
            let l_dag = Csr::from_dense(&l.adjoint());
            l_dag.mul_dense_acc(l, C64::new(0.0, -0.5 * ch.rate), &mut anti);
            jumps.push((Csr::from_dense(l), ch.rate));
        }
        Dissipator { anti, jumps }
    }
}

/// Compiled generator for one constant-Hamiltonian stretch.
struct Liouvillian<'a> {
    /// `H - (i/2) Σ r L^† L`
    k: Csr,
    jumps: &'a [(Csr, f64)],
}

impl<'a> Liouvillian<'a> {
    fn new(h: &DMatrix<C64>, diss: &'a Dissipator) -> Self {
        Liouvillian { k: Csr::from_dense(&(h + &diss.anti)), jumps: &diss.jumps }
    }

    /// `out = L(rho)`; `y` and `lr` are scratch.
    fn apply(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>, y: &mut DMatrix<C64>, lr: &mut DMatrix<C64>) {
        let n = rho.nrows();
        y.fill(C64::new(0.0, 0.0));
        self.k.mul_dense_acc(rho, C64::new(0.0, -1.0), y);
        for j in 0..n {
            for i in 0..n {
                out[(i, j)] = y[(i, j)] + y[(j, i)].conj();
            }
        }
        for (l, rate) in self.jumps {
            lr.fill(C64::new(0.0, 0.0));
            l.mul_dense_acc(rho, C64::new(1.0, 0.0), lr);
            l.dense_mul_adjoint_acc(lr, C64::new(*rate, 0.0), out);
        }
    }

    fn rk4_step(&self, rho: &mut DMatrix<C64>, h: f64, ws: &mut Workspace) {
        let Workspace { k, arg, acc, y, lr } = ws;
        self.apply(rho, k, y, lr);
        acc.copy_from(k);
        let stages = [(0.5 * h, 2.0), (0.5 * h, 2.0), (h, 1.0)];
        for (shift, weight) in stages {
            arg.copy_from(rho);
            axpy(arg, shift, k);
            self.apply(arg, k, y, lr);
            axpy(acc, weight, k);
        }
        axpy(rho, h / 6.0, acc);
        let n = rho.nrows();
        for j in 0..n {
            for i in 0..j {
                let m = (rho[(i, j)] + rho[(j, i)].conj()) * 0.5;
                rho[(i, j)] = m;
                rho[(j, i)] = m.conj();
            }
            rho[(j, j)].im = 0.0;
        }
    }
}

/// `y += a x`
fn axpy(y: &mut DMatrix<C64>, a: f64, x: &DMatrix<C64>) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += xi * a;
    }
}

/// Scratch matrices reused across RK4 steps.
struct Workspace {
    k: DMatrix<C64>,
    arg: DMatrix<C64>,
    acc: DMatrix<C64>,
    y: DMatrix<C64>,
    lr: DMatrix<C64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = || DMatrix::zeros(n, n);
        Workspace { k: z(), arg: z(), acc: z(), y: z(), lr: z() }
    }
}

fn max_rate(channels: &[CollapseChannel]) -> f64 {
    channels.iter().map(|c| c.rate).fold(0.0, f64::max)
}

/// Step size used when the caller does not pick one: `min(0.01/g, T_phi/1000,
/// 0.5 µs)`, tightened so that `dt · max(rate, |H|) ≤ 0.02`.
pub fn default_dt(g: f64, tphi: f64, generator_norm: f64) -> f64 {
    let mut dt: f64 = 0.5;
    if g > 0.0 {
        dt = dt.min(0.01 / g);
    }
    if tphi > 0.0 && tphi.is_finite() {
        dt = dt.min(tphi / 1000.0);
    }
    if generator_norm > 0.0 {
        dt = dt.min(0.02 / generator_norm);
    }
    dt
}

fn integrate(
    rho: &DMatrix<C64>,
    stretches: &[(DMatrix<C64>, f64)],
    channels: &[CollapseChannel],
    dt: f64,
) -> Result<DMatrix<C64>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidTime(format!("step {dt} must be positive")));
    }
    let rate = max_rate(channels);
    for (h, _) in stretches {
        let stiffness = dt * rate.max(row_sum_norm(h));
        if stiffness > 0.1 {
            return Err(Error::StepTooLarge(stiffness));
        }
    }
    let diss = Dissipator::new(rho.nrows(), channels);
    let mut rho = rho.clone();
    let mut ws = Workspace::new(rho.nrows());
    for (h, duration) in stretches {
        if *duration <= 0.0 {
            continue;
        }
        let gen = Liouvillian::new(h, &diss);
        let steps = (duration / dt - 1e-9).ceil().max(1.0) as usize;
        let step = duration / steps as f64;
        for _ in 0..steps {
            gen.rk4_step(&mut rho, step, &mut ws);
        }
    }
    Ok(rho)
}

fn density_input(state: &QuantumState) -> Result<&DMatrix<C64>> {
    state.density().ok_or(Error::NotDensity)
}

/// Lindblad evolution for time `t` with fixed step `dt`.
pub fn lindblad_evolve(
    rho: &QuantumState,
    terms: &[HamiltonianTerm],
    channels: &[CollapseChannel],
    t: f64,
    dt: f64,
) -> Result<QuantumState> {
    let m = density_input(rho)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidTime(format!("negative duration {t}")));
    }
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let h = sum_terms(terms, m.nrows())?;
    check_hermitian(&h, row_sum_norm(&h))?;
    let out = integrate(m, &[(h, t)], channels, dt.min(t))?;
    Ok(rho.replace_data(StateData::Density(out)))
}

/// Lindblad evolution under `envelope(t) · H_drive + H_static`.
pub fn lindblad_envelope(
    rho: &QuantumState,
    drive: &[HamiltonianTerm],
    fixed: &[HamiltonianTerm],
    channels: &[CollapseChannel],
    env: &Envelope,
    per_ramp: usize,
    dt: f64,
) -> Result<QuantumState> {
    let m = density_input(rho)?;
    let dim = m.nrows();
    let hd = sum_terms(drive, dim)?;
    let hs = sum_terms(fixed, dim)?;
    check_hermitian(&hd, row_sum_norm(&hd))?;
    check_hermitian(&hs, row_sum_norm(&hs))?;
    let stretches: Vec<_> = env
        .segments(per_ramp)
        .into_iter()
        .map(|(height, d)| (&hd * C64::new(height, 0.0) + &hs, d))
        .collect();
    let out = integrate(m, &stretches, channels, dt)?;
    Ok(rho.replace_data(StateData::Density(out)))
}

/// Norm bound of the generator used to pick a default step.
pub fn generator_norm(terms: &[HamiltonianTerm], channels: &[CollapseChannel], dim: usize) -> Result<f64> {
    let h = sum_terms(terms, dim)?;
    Ok(row_sum_norm(&h).max(max_rate(channels)))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_state, ONE};

    fn space() -> ModeSpace {
        ModeSpace::two_mode(4, 4).unwrap()
    }

    #[test]
    fn bilinear_zero_and_element() {
        let s = space();
        let h0 = bilinear_hamiltonian(&s, 0.0, 0.3).unwrap();
        assert_eq!(h0.to_matrix().norm(), 0.0);
        let (g, phi) = (0.034, 0.7);
        let h = bilinear_hamiltonian(&s, g, phi).unwrap().to_matrix();
        let i01 = s.flatten(&[0, 1]).unwrap();
        let i10 = s.flatten(&[1, 0]).unwrap();
        // a b^† |1,0> = |0,1>, weighted by e^{iφ}
        let expect = C64::from_polar(TWO_PI * g, phi);
        assert!((h[(i01, i10)] - expect).norm() < 1e-15);
        assert!(bilinear_hamiltonian(&ModeSpace::single(3).unwrap(), 0.1, 0.0).is_err());
    }

    #[test]
    fn bilinear_commutes_with_total_number() {
        let s = space();
        let h = bilinear_hamiltonian(&s, 0.05, 1.1).unwrap();
        let n = embed(&number_op(4), 0, &s).unwrap().add(&embed(&number_op(4), 1, &s).unwrap());
        assert!(h.matrix().commutator(&n).matrix().norm() < 1e-12);
    }

    #[test]
    fn kerr_diagonal_entries() {
        let s = space();
        let zero = kerr_hamiltonian(&s, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(zero.to_matrix().norm(), 0.0);
        let h = kerr_hamiltonian(&s, 0.008, 0.0, 0.0).unwrap().to_matrix();
        let i20 = s.flatten(&[2, 0]).unwrap();
        assert!((h[(i20, i20)].re + TWO_PI * 0.008).abs() < 1e-15);
        let h = kerr_hamiltonian(&s, 0.0, 0.0, 0.001).unwrap().to_matrix();
        let i11 = s.flatten(&[1, 1]).unwrap();
        assert!((h[(i11, i11)].re + TWO_PI * 0.001).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        let err = HamiltonianTerm::new("bad", Operator::from_matrix(m), 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidHamiltonian(_)));
    }

    #[test]
    fn swap_at_quarter_period() {
        let s = space();
        let g = 0.034;
        let h = bilinear_hamiltonian(&s, g, 0.0).unwrap();
        let t = (PI / 2.0) / (TWO_PI * g);
        let out = propagate_unitary(&fock_state(&s, &[1, 0]).unwrap(), &[h.clone()], t).unwrap();
        let target = fock_state(&s, &[0, 1]).unwrap();
        assert!((out.fidelity_to_pure(&target).unwrap() - 1.0).abs() < 1e-12);
        // sign convention: amplitude on |0,1> is -i
        let amp = out.vector().unwrap()[s.flatten(&[0, 1]).unwrap()];
        assert!((amp - C64::new(0.0, -1.0)).norm() < 1e-12);
        let same = propagate_unitary(&fock_state(&s, &[1, 0]).unwrap(), &[h], 0.0).unwrap();
        assert_eq!(same, fock_state(&s, &[1, 0]).unwrap());
    }

    #[test]
    fn envelope_area_and_theta() {
        assert_eq!(effective_theta(0.034, &Envelope { plateau: 0.0, ring: 0.0 }), 0.0);
        // 3.676 µs is the rounded 50:50 time
        let theta = effective_theta(0.034, &Envelope::square(3.676));
        assert!((theta - 0.7853).abs() < 1e-4);
        let exact = effective_theta(0.034, &Envelope::square(1.0 / (8.0 * 0.034)));
        assert!((exact - PI / 4.0).abs() < 1e-12);

        let env = Envelope { plateau: 2.3, ring: 0.1 };
        let n = 200_000;
        let h = env.total_duration() / n as f64;
        let trap: f64 = (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * env.value(k as f64 * h)
            })
            .sum::<f64>()
            * h;
        assert!((trap - env.integral()).abs() < 1e-9);
        let seg_area: f64 = env.segments(64).iter().map(|(a, d)| a * d).sum();
        assert!((seg_area - env.integral()).abs() < 1e-12);
    }

    #[test]
    fn with_area_shrinks_ring() {
        let e = Envelope::with_area(0.05, 0.1);
        assert_eq!(e.ring, 0.05);
        assert_eq!(e.integral(), 0.05);
        let e = Envelope::with_area(3.0, 0.1);
        assert!((e.integral() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn lindblad_zero_time_and_pure_rejected() {
        let s = space();
        let psi = fock_state(&s, &[1, 0]).unwrap();
        assert_eq!(lindblad_evolve(&psi, &[], &[], 1.0, 0.01), Err(Error::NotDensity));
        let rho = psi.to_density();
        assert_eq!(lindblad_evolve(&rho, &[], &[], 0.0, 0.01).unwrap(), rho);
    }

    #[test]
    fn step_guard() {
        let s = space();
        let h = bilinear_hamiltonian(&s, 1.0, 0.0).unwrap();
        let rho = fock_state(&s, &[1, 0]).unwrap().to_density();
        assert!(matches!(lindblad_evolve(&rho, &[h], &[], 10.0, 0.5), Err(Error::StepTooLarge(_))));
    }

    #[test]
    fn dephasing_coherence_decay() {
        let s = ModeSpace::single(3).unwrap();
        let tphi = 50.0;
        let mut psi = nalgebra::DVector::zeros(3);
        psi[0] = C64::new(0.5f64.sqrt(), 0.0);
        psi[1] = C64::new(0.5f64.sqrt(), 0.0);
        let rho = QuantumState::from_vector(s.clone(), psi).unwrap().to_density();
        let ch = dephasing_channel(&s, 0, tphi).unwrap();
        let t = 30.0;
        let out = lindblad_evolve(&rho, &[], &[ch], t, 0.05).unwrap();
        let coh = out.density().unwrap()[(0, 1)].re;
        assert!((coh - 0.5 * (-t / tphi).exp()).abs() < 1e-9);
    }
}
