//! Gate set: beamsplitter, differential phase shifter, displacement, idle,
//! and `|2,1>` preparation.
//!
//! Ideal gates are instantaneous unitaries. Physical gates run the master
//! equation over the gate's duration with Kerr terms, photon loss and
//! dephasing, and report the coupler-excitation probability they incur.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::evolution::{
    bilinear_hamiltonian, default_dt, dephasing_channel, generator_norm, kerr_hamiltonian, lindblad_envelope,
    lindblad_evolve, loss_channel, number_phase_term, propagate_unitary, CollapseChannel, Envelope,
    HamiltonianTerm, DEFAULT_SEGMENTS_PER_RAMP,
};
use crate::fock::{annihilation_op, embed, fock_state, ModeSpace, Operator, QuantumState, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateMode {
    #[default]
    Ideal,
    Physical,
}

impl GateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GateMode::Ideal => "ideal",
            GateMode::Physical => "physical",
        }
    }
}

impl std::str::FromStr for GateMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ideal" => Ok(GateMode::Ideal),
            "physical" => Ok(GateMode::Physical),
            other => Err(format!("unknown mode `{other}` (expected ideal or physical)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamsplitterSpec {
    pub theta: f64,
    pub phi: f64,
    pub mode: GateMode,
}

impl BeamsplitterSpec {
    pub fn new(theta: f64, phi: f64, mode: GateMode) -> Self {
        BeamsplitterSpec { theta, phi, mode }
    }

    pub fn fifty_fifty(mode: GateMode) -> Self {
        BeamsplitterSpec::new(PI / 4.0, 0.0, mode)
    }

    /// 50:50 splitter with real mixing, `a -> (a - b)/√2`. Alice's output
    /// port is then the difference mode, whose parity equals `Tr(ρ_A ρ_B)`
    /// for product inputs.
    pub fn swap_test(mode: GateMode) -> Self {
        BeamsplitterSpec::new(PI / 4.0, PI / 2.0, mode)
    }
}

/// What a gate did: name, wall-clock duration, coupler excitation
/// probability and truncation leakage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub name: String,
    pub duration: f64,
    pub p_exc: f64,
    pub leakage: f64,
}

impl GateRecord {
    fn new(name: &str, duration: f64, p_exc: f64, leakage: f64) -> Self {
        GateRecord { name: name.to_string(), duration, p_exc, leakage }
    }
}

/// Rejects states whose top Fock level holds more than `tolerance`;
/// otherwise books that population as leakage and returns it.
pub fn truncation_guard(state: &mut QuantumState, tolerance: f64) -> Result<f64> {
    let top = state.max_top_level_population();
    if top > tolerance {
        return Err(Error::TruncationTooSmall { leakage: top, tolerance });
    }
    state.add_leakage(top);
    Ok(top)
}

fn require_two_mode(state: &QuantumState) -> Result<()> {
    if state.space().is_two_mode() {
        Ok(())
    } else {
        Err(Error::InvalidSpace(format!("gate needs two modes, found {}", state.space().num_modes())))
    }
}

/// Loss and dephasing on both cavities. `drive_on` applies the drive
/// dephasing multiplier.
pub fn cavity_channels(space: &ModeSpace, params: &DeviceParams, drive_on: bool) -> Result<Vec<CollapseChannel>> {
    let factor = if drive_on { params.drive_dephasing_factor } else { 1.0 };
    let mut out = Vec::new();
    for (mode, t1, tphi) in [(0, params.t1_a, params.tphi_a), (1, params.t1_b, params.tphi_b)] {
        if t1.is_finite() {
            out.push(loss_channel(space, mode, t1)?);
        }
        if tphi.is_finite() && factor > 0.0 {
            out.push(dephasing_channel(space, mode, tphi / factor)?);
        }
    }
    Ok(out)
}

fn step_for(terms: &[HamiltonianTerm], channels: &[CollapseChannel], space: &ModeSpace, params: &DeviceParams) -> Result<f64> {
    let norm = generator_norm(terms, channels, space.total_dim())?;
    Ok(default_dt(params.g, params.tphi_a.min(params.tphi_b), norm))
}

fn densify(state: &QuantumState) -> QuantumState {
    if state.is_pure() {
        state.to_density()
    } else {
        state.clone()
    }
}

/// Drive duration that accumulates mixing angle `theta` at coupling `g`.
pub fn drive_area(theta: f64, g: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::InvalidCoupling(g));
    }
    Ok(theta / (TAU * g))
}

/// Physical beamsplitter driven with a given envelope.
pub fn beamsplitter_envelope(
    state: &QuantumState,
    env: &Envelope,
    phi: f64,
    params: &DeviceParams,
) -> Result<(QuantumState, GateRecord)> {
    require_two_mode(state)?;
    let space = state.space().clone();
    let drive = [bilinear_hamiltonian(&space, params.g, phi)?];
    let fixed = [kerr_hamiltonian(&space, params.chi_aa, params.chi_bb, params.chi_ab)?];
    let channels = cavity_channels(&space, params, true)?;
    let all: Vec<_> = drive.iter().chain(fixed.iter()).cloned().collect();
    let dt = step_for(&all, &channels, &space, params)?;
    let mut out = lindblad_envelope(&densify(state), &drive, &fixed, &channels, env, DEFAULT_SEGMENTS_PER_RAMP, dt)?;
    let leak = truncation_guard(&mut out, params.leakage_tolerance)?;
    let p_exc = if env.integral() > 0.0 { params.p_exc } else { 0.0 };
    Ok((out, GateRecord::new("bs", env.total_duration(), p_exc, leak)))
}

/// `exp[-iθ(e^{iφ} a b^† + e^{-iφ} a^† b)]`, instantaneously or as a
/// finite drive with ramps, Kerr and decoherence.
pub fn beamsplitter(
    state: &QuantumState,
    spec: &BeamsplitterSpec,
    params: &DeviceParams,
) -> Result<(QuantumState, GateRecord)> {
    require_two_mode(state)?;
    if !(spec.theta >= 0.0) {
        return Err(Error::InvalidParams(format!("beamsplitter angle {} must be non-negative", spec.theta)));
    }
    match spec.mode {
        GateMode::Ideal => {
            let h = bilinear_hamiltonian(state.space(), spec.theta / TAU, spec.phi)?;
            let mut out = propagate_unitary(state, &[h], 1.0)?;
            let leak = truncation_guard(&mut out, params.leakage_tolerance)?;
            Ok((out, GateRecord::new("bs", 0.0, 0.0, leak)))
        }
        GateMode::Physical => {
            let env = Envelope::with_area(drive_area(spec.theta, params.g)?, params.ring_time);
            beamsplitter_envelope(state, &env, spec.phi, params)
        }
    }
}

/// Differential phase `e^{iφ n_a}` on Alice. Physically the ancilla stays
/// excited for `φ / (2π χ₁)` while the cavities idle.
pub fn dps(state: &QuantumState, phi: f64, params: &DeviceParams, mode: GateMode) -> Result<(QuantumState, GateRecord)> {
    let phi = phi.rem_euclid(TAU);
    let space = state.space().clone();
    match mode {
        GateMode::Ideal => {
            let diag = (0..space.total_dim()).map(|i| C64::from_polar(1.0, phi * space.occupation(i, 0) as f64));
            let u = Operator::from_matrix(nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                space.total_dim(),
                diag,
            )));
            Ok((state.transform(&u)?, GateRecord::new("dps", 0.0, 0.0, 0.0)))
        }
        GateMode::Physical => {
            let duration = phi / params.dps_rate();
            let mut terms = vec![number_phase_term(&space, 0, params.chi_1)?];
            if space.is_two_mode() {
                terms.push(kerr_hamiltonian(&space, params.bare_chi_aa, params.bare_chi_bb, params.chi_ab)?);
            }
            let channels = cavity_channels(&space, params, false)?;
            let dt = step_for(&terms, &channels, &space, params)?;
            let mut out = lindblad_evolve(&densify(state), &terms, &channels, duration, dt)?;
            let leak = truncation_guard(&mut out, params.leakage_tolerance)?;
            Ok((out, GateRecord::new("dps", duration, 0.0, leak)))
        }
    }
}

/// Idle for `t`. Ideal mode is the identity.
pub fn wait(state: &QuantumState, t: f64, params: &DeviceParams, mode: GateMode) -> Result<(QuantumState, GateRecord)> {
    if !(t >= 0.0) {
        return Err(Error::InvalidTime(format!("negative wait {t}")));
    }
    if mode == GateMode::Ideal || t == 0.0 {
        return Ok((state.clone(), GateRecord::new("wait", t, 0.0, 0.0)));
    }
    require_two_mode(state)?;
    let space = state.space().clone();
    let terms = [kerr_hamiltonian(&space, params.bare_chi_aa, params.bare_chi_bb, params.chi_ab)?];
    let channels = cavity_channels(&space, params, false)?;
    let dt = step_for(&terms, &channels, &space, params)?;
    let mut out = lindblad_evolve(&densify(state), &terms, &channels, t, dt)?;
    let leak = truncation_guard(&mut out, params.leakage_tolerance)?;
    Ok((out, GateRecord::new("wait", t, 0.0, leak)))
}

/// Truncated displacement `exp(α a^† - α* a)` on one mode, built as the
/// propagator of the Hermitian generator `i(α a^† - α* a)`.
pub fn displace(state: &QuantumState, mode: usize, alpha: C64, tolerance: f64) -> Result<QuantumState> {
    let space = state.space().clone();
    if mode >= space.num_modes() {
        return Err(Error::InvalidSpace(format!("mode {mode} not in a {}-mode space", space.num_modes())));
    }
    if alpha == C64::new(0.0, 0.0) {
        return Ok(state.clone());
    }
    let a = embed(&annihilation_op(space.dims()[mode])?, mode, &space)?;
    let gen = a.adjoint().scaled(alpha).add(&a.scaled(-alpha.conj())).scaled(C64::new(0.0, 1.0));
    let h = HamiltonianTerm::new("displacement", gen, 1.0)?;
    let mut out = propagate_unitary(state, &[h], 1.0)?;
    truncation_guard(&mut out, tolerance)?;
    Ok(out)
}

/// Prepared `|2,1>` and its fidelity.
#[derive(Debug, Clone, PartialEq)]
pub struct Preparation {
    pub state: QuantumState,
    pub record: GateRecord,
    pub fidelity: f64,
}

/// `|2,1>`: one photon in Alice, swapped into Bob, then two photons loaded
/// into Alice. Physical mode runs the swap as a real drive.
pub fn prepare_21(space: &ModeSpace, params: &DeviceParams, mode: GateMode) -> Result<Preparation> {
    if !space.is_two_mode() || space.dims().iter().any(|&d| d < 4) {
        return Err(Error::InvalidSpace(format!("|2,1> preparation needs dims >= [4,4], found {:?}", space.dims())));
    }
    let target = fock_state(space, &[2, 1])?;
    match mode {
        GateMode::Ideal => Ok(Preparation {
            state: target,
            record: GateRecord::new("prep21", 0.0, 0.0, 0.0),
            fidelity: 1.0,
        }),
        GateMode::Physical => {
            let start = fock_state(space, &[1, 0])?;
            let (swapped, rec) = beamsplitter(&start, &BeamsplitterSpec::new(PI / 2.0, 0.0, mode), params)?;
            // load Alice: exchange her |0> and |2> levels
            let d = space.total_dim();
            let mut perm = nalgebra::DMatrix::zeros(d, d);
            for i in 0..d {
                let mut occ = space.unflatten(i);
                occ[0] = match occ[0] {
                    0 => 2,
                    2 => 0,
                    n => n,
                };
                perm[(space.flatten(&occ)?, i)] = C64::new(1.0, 0.0);
            }
            let state = swapped.transform(&Operator::from_matrix(perm))?;
            let fidelity = state.fidelity_to_pure(&target)?;
            Ok(Preparation {
                state,
                record: GateRecord::new("prep21", rec.duration, rec.p_exc, rec.leakage),
                fidelity,
            })
        }
    }
}

/// `P_11` for distinguishable photons through a beamsplitter of angle θ.
pub fn distinguishable_p11(theta: f64) -> f64 {
    theta.cos().powi(4) + theta.sin().powi(4)
}
