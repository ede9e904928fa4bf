//! Readout models: joint photon-number populations, selective-pulse
//! frequencies, parity, the parity swap test, and post-selection on the
//! coupler staying in its ground state.
//!
//! Readout imperfections are multiplicative contrast factors.

use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::interferometry::{beamsplitter, BeamsplitterSpec, GateMode, GateRecord};

/// `probs[n][m]` for Alice holding `n` and Bob `m` photons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointNumberDistribution {
    pub probs: Vec<Vec<f64>>,
    pub spam_applied: bool,
    /// Probability that the coupler stayed in its ground state.
    pub survival: f64,
    /// Probabilities already carry the survival factor.
    pub excitation_loss_applied: bool,
    pub postselected: bool,
}

impl JointNumberDistribution {
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.probs.get(n).and_then(|row| row.get(m)).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.probs.len(), self.probs.first().map_or(0, Vec::len))
    }

    fn scale(&mut self, factor: f64) {
        for p in self.probs.iter_mut().flatten() {
            *p *= factor;
        }
    }

    /// Count the coupler-excited runs as missing from every outcome.
    pub fn apply_excitation_loss(mut self, records: &[GateRecord]) -> Self {
        if self.excitation_loss_applied || self.postselected {
            return self;
        }
        let s = survival(records);
        self.scale(s);
        self.survival = s;
        self.excitation_loss_applied = true;
        self
    }
}

pub fn survival(records: &[GateRecord]) -> f64 {
    records.iter().map(|r| 1.0 - r.p_exc).product()
}

/// Born-rule joint populations, optionally scaled by the readout contrast.
pub fn joint_number_probs(state: &QuantumState, params: &DeviceParams, apply_spam: bool) -> Result<JointNumberDistribution> {
    let space = state.space();
    if !space.is_two_mode() {
        return Err(Error::InvalidSpace(format!("joint readout needs two modes, found {}", space.num_modes())));
    }
    let (da, db) = (space.dims()[0], space.dims()[1]);
    let mut probs = vec![vec![0.0; db]; da];
    for (i, p) in state.probabilities().into_iter().enumerate() {
        probs[space.occupation(i, 0)][space.occupation(i, 1)] = p;
    }
    let mut dist = JointNumberDistribution {
        probs,
        spam_applied: false,
        survival: 1.0,
        excitation_loss_applied: false,
        postselected: false,
    };
    if apply_spam {
        dist.scale(params.readout_scale);
        dist.spam_applied = true;
    }
    Ok(dist)
}

/// Coupler frequency that flips it only when the cavities hold `|n,m>`.
pub fn selective_pulse_freq(n: usize, m: usize, params: &DeviceParams) -> f64 {
    params.omega_ge - n as f64 * params.chi_ac - m as f64 * params.chi_bc
}

/// Fails when two `(n, m)` pairs with `n, m <= max_n` share a selective
/// frequency, i.e. the joint readout could not tell them apart.
pub fn check_selective_injective(params: &DeviceParams, max_n: usize) -> Result<()> {
    let mut freqs: Vec<(f64, usize, usize)> = Vec::with_capacity((max_n + 1) * (max_n + 1));
    for n in 0..=max_n {
        for m in 0..=max_n {
            freqs.push((selective_pulse_freq(n, m, params), n, m));
        }
    }
    freqs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in freqs.windows(2) {
        if (w[1].0 - w[0].0).abs() <= 1e-9 * w[0].0.abs().max(1.0) {
            return Err(Error::InvalidParams(format!(
                "selective frequencies of |{},{}> and |{},{}> coincide",
                w[0].1, w[0].2, w[1].1, w[1].2
            )));
        }
    }
    Ok(())
}

/// `<(-1)^n>` of one mode, optionally times the parity contrast.
pub fn parity_expectation(state: &QuantumState, mode: usize, params: &DeviceParams, apply_contrast: bool) -> Result<f64> {
    if mode >= state.space().num_modes() {
        return Err(Error::InvalidSpace(format!("mode {mode} not in a {}-mode space", state.space().num_modes())));
    }
    let raw: f64 = state
        .mode_distribution(mode)
        .iter()
        .enumerate()
        .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
        .sum();
    Ok(if apply_contrast { raw * params.parity_contrast } else { raw })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapEstimate {
    /// Alice parity after the 50:50 splitter.
    pub value: f64,
    /// `value` times the parity contrast.
    pub scaled: f64,
    /// `Tr(ρ_A ρ_B)` computed directly.
    pub ideal_value: f64,
    pub contrast: f64,
}

/// `Tr(ρ σ)` of two single-mode states.
pub fn state_overlap(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if a.space() != b.space() {
        return Err(Error::DimensionMismatch { expected: a.space().total_dim(), found: b.space().total_dim() });
    }
    Ok(match (a.vector(), b.vector()) {
        (Some(u), Some(v)) => u.dotc(v).norm_sqr(),
        _ => (a.density_matrix() * b.density_matrix()).trace().re,
    })
}

/// Swap test: interfere the two states on a 50:50 splitter and read the
/// parity of Alice.
pub fn overlap_via_parity(
    rho_a: &QuantumState,
    rho_b: &QuantumState,
    params: &DeviceParams,
    mode: GateMode,
) -> Result<OverlapEstimate> {
    for s in [rho_a, rho_b] {
        if s.space().num_modes() != 1 {
            return Err(Error::InvalidSpace("overlap inputs must be single-mode".into()));
        }
    }
    if rho_a.space() != rho_b.space() {
        return Err(Error::DimensionMismatch { expected: rho_a.space().total_dim(), found: rho_b.space().total_dim() });
    }
    let ideal_value = state_overlap(rho_a, rho_b)?;
    let joint = rho_a.product(rho_b)?;
    let (out, _) = beamsplitter(&joint, &BeamsplitterSpec::swap_test(mode), params)?;
    let value = parity_expectation(&out, 0, params, false)?;
    Ok(OverlapEstimate { value, scaled: value * params.parity_contrast, ideal_value, contrast: params.parity_contrast })
}

/// Keep only runs where the coupler stayed in its ground state.
pub fn postselect(dist: &JointNumberDistribution, records: &[GateRecord]) -> Result<JointNumberDistribution> {
    if dist.postselected {
        return Ok(dist.clone());
    }
    let s = survival(records);
    if s <= 0.0 {
        return Err(Error::AllDiscarded);
    }
    let mut out = dist.clone();
    if out.excitation_loss_applied {
        out.scale(1.0 / out.survival);
        out.excitation_loss_applied = false;
    }
    out.survival = s;
    out.postselected = true;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, fock_state, ModeSpace, C64};
    use nalgebra::DVector;

    fn rec(p: f64) -> GateRecord {
        GateRecord { name: "bs".into(), duration: 1.0, p_exc: p, leakage: 0.0 }
    }

    #[test]
    fn joint_readout() {
        let s = ModeSpace::two_mode(3, 3).unwrap();
        let p = DeviceParams::default();
        let psi = fock_state(&s, &[1, 0]).unwrap();
        let raw = joint_number_probs(&psi, &p, false).unwrap();
        assert_eq!(raw.get(1, 0), 1.0);
        assert_eq!(raw.total(), 1.0);
        let spam = joint_number_probs(&psi, &p, true).unwrap();
        assert!((spam.get(1, 0) - 0.82).abs() < 1e-15);
        let mut v = DVector::zeros(9);
        v[s.flatten(&[2, 0]).unwrap()] = C64::new(0.5f64.sqrt(), 0.0);
        v[s.flatten(&[0, 2]).unwrap()] = C64::new(0.5f64.sqrt(), 0.0);
        let d = joint_number_probs(&QuantumState::from_vector(s, v).unwrap(), &p, false).unwrap();
        assert!((d.get(2, 0) - 0.5).abs() < 1e-15 && (d.get(0, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn selective_frequencies() {
        let p = DeviceParams::default();
        assert_eq!(selective_pulse_freq(0, 0, &p), 5901.0);
        assert!((selective_pulse_freq(1, 0, &p) - 5900.38).abs() < 1e-9);
        assert!((selective_pulse_freq(1, 1, &p) - 5900.12).abs() < 1e-9);
        check_selective_injective(&p, 10).unwrap();
        let mut bad = p.clone();
        bad.chi_ac = 0.5;
        bad.chi_bc = 0.25;
        assert!(check_selective_injective(&bad, 10).is_err());
    }

    #[test]
    fn parity_values() {
        let p = DeviceParams::default();
        let s = ModeSpace::single(20).unwrap();
        let vac = fock_state(&s, &[0]).unwrap();
        assert_eq!(parity_expectation(&vac, 0, &p, false).unwrap(), 1.0);
        assert!((parity_expectation(&vac, 0, &p, true).unwrap() - 0.94).abs() < 1e-15);
        assert_eq!(parity_expectation(&fock_state(&s, &[1]).unwrap(), 0, &p, false).unwrap(), -1.0);
        let coh = coherent_state(20, C64::new(1.0, 0.0)).unwrap();
        // direct sum over the Poisson weights
        let direct: f64 = (0..60).map(|n| (-1.0f64).powi(n) * (-1.0f64).exp() / (1..=n).map(f64::from).product::<f64>()).sum();
        let got = parity_expectation(&coh, 0, &p, false).unwrap();
        assert!((got - (-2.0f64).exp()).abs() < 1e-9);
        assert!((direct - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn swap_test_cases() {
        let p = DeviceParams::default();
        let s = ModeSpace::single(4).unwrap();
        let a = fock_state(&s, &[1]).unwrap();
        let same = overlap_via_parity(&a, &a, &p, GateMode::Ideal).unwrap();
        assert!((same.value - 1.0).abs() < 1e-12);
        let orth = overlap_via_parity(&fock_state(&s, &[0]).unwrap(), &a, &p, GateMode::Ideal).unwrap();
        assert!(orth.value.abs() < 1e-12 && orth.ideal_value == 0.0);

        let al = C64::new(2.0f64.sqrt(), 0.0);
        let ca = coherent_state(24, al).unwrap();
        let cb = coherent_state(24, -al).unwrap();
        let est = overlap_via_parity(&ca, &cb, &p, GateMode::Ideal).unwrap();
        assert!((est.value - (-8.0f64).exp()).abs() < 1e-6);
        assert!(overlap_via_parity(&ca, &fock_state(&s, &[0]).unwrap(), &p, GateMode::Ideal).is_err());
    }

    #[test]
    fn postselection() {
        let s = ModeSpace::two_mode(3, 3).unwrap();
        let p = DeviceParams::default();
        let d = joint_number_probs(&fock_state(&s, &[1, 0]).unwrap(), &p, true).unwrap();
        assert_eq!(postselect(&d, &[rec(0.0)]).unwrap().probs, d.probs);
        let lost = d.clone().apply_excitation_loss(&[rec(0.01), rec(0.01)]);
        assert!((lost.survival - 0.9801).abs() < 1e-15);
        assert!((lost.total() - 0.82 * 0.9801).abs() < 1e-12);
        let ps = postselect(&lost, &[rec(0.01), rec(0.01)]).unwrap();
        assert!((ps.total() - 0.82).abs() < 1e-12);
        assert_eq!(postselect(&ps, &[rec(0.5)]).unwrap(), ps);
        for pe in [0.006, 0.02] {
            assert!(postselect(&d, &[rec(pe)]).is_ok());
        }
        assert_eq!(postselect(&d, &[rec(1.0)]), Err(Error::AllDiscarded));
    }
}
