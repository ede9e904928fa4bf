//! Calibrated device constants and the drive-to-coupling formulas.
//!
//! Frequencies are cyclic (MHz), times are µs. Angular factors of 2π enter
//! only when Hamiltonians are assembled for evolution.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the two-cavity device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Alice frequency.
    pub omega_a: f64,
    /// Bob frequency.
    pub omega_b: f64,
    /// Coupler transmon g-e frequency.
    pub omega_ge: f64,
    /// Dispersive shift coupler ↔ Alice.
    pub chi_ac: f64,
    /// Dispersive shift coupler ↔ Bob.
    pub chi_bc: f64,
    /// Dispersive shift of the phase ancilla on Alice; sets the DPS rate.
    pub chi_1: f64,
    /// Self-Kerr of Alice while the drives are on.
    pub chi_aa: f64,
    /// Self-Kerr of Bob while the drives are on.
    pub chi_bb: f64,
    /// Alice-Bob cross-Kerr.
    pub chi_ab: f64,
    /// Undriven self-Kerr of Alice.
    pub bare_chi_aa: f64,
    /// Undriven self-Kerr of Bob.
    pub bare_chi_bb: f64,
    /// Coupler anharmonicity.
    pub alpha: f64,
    /// Effective coupler decay rate.
    pub kappa_tilde: f64,
    pub t1_a: f64,
    pub t1_b: f64,
    pub tphi_a: f64,
    pub tphi_b: f64,
    /// Joint-number readout contrast (SPAM scale).
    pub readout_scale: f64,
    /// Parity-measurement contrast.
    pub parity_contrast: f64,
    /// Coupler excitation probability per physical beamsplitter.
    pub p_exc: f64,
    /// Operating beamsplitter coupling.
    pub g: f64,
    /// Drive envelope ring-up (and ring-down) duration.
    pub ring_time: f64,
    /// Selective π-pulse duration charged for mid-program readout.
    pub readout_time: f64,
    /// Multiplier on cavity dephasing while the drives are on.
    pub drive_dephasing_factor: f64,
    /// Allowed top-level population before a truncation error.
    pub leakage_tolerance: f64,
    /// |ξ₁| / |ξ₂| used when splitting a drive-strength product.
    pub xi_ratio: f64,
}

/// `1/T_phi` from `1/T_2 = 1/(2 T_1) + 1/T_phi`.
pub fn tphi_from_t2(t1: f64, t2: f64) -> Result<f64> {
    let rate = 1.0 / t2 - 1.0 / (2.0 * t1);
    if !(rate > 0.0) {
        return Err(Error::InvalidParams(format!("T2 = {t2} us is not below 2*T1 = {} us", 2.0 * t1)));
    }
    Ok(1.0 / rate)
}

impl Default for DeviceParams {
    fn default() -> Self {
        let tphi = tphi_from_t2(450.0, 500.0).expect("default coherence times are consistent");
        DeviceParams {
            omega_a: 5554.0,
            omega_b: 6543.0,
            omega_ge: 5901.0,
            chi_ac: 0.62,
            chi_bc: 0.26,
            chi_1: 1.01,
            chi_aa: 0.008,
            chi_bb: 0.005,
            chi_ab: 0.001,
            bare_chi_aa: 0.004,
            bare_chi_bb: 0.002,
            alpha: 74.0,
            kappa_tilde: 0.0032,
            t1_a: 450.0,
            t1_b: 450.0,
            tphi_a: tphi,
            tphi_b: tphi,
            readout_scale: 0.82,
            parity_contrast: 0.94,
            p_exc: 0.01,
            g: 0.034,
            ring_time: 0.1,
            readout_time: 4.8,
            drive_dephasing_factor: 1.40625,
            leakage_tolerance: crate::fock::DEFAULT_LEAKAGE_TOLERANCE,
            xi_ratio: 3.0,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t1_a", self.t1_a),
            ("t1_b", self.t1_b),
            ("tphi_a", self.tphi_a),
            ("tphi_b", self.tphi_b),
            ("chi_ac", self.chi_ac),
            ("chi_bc", self.chi_bc),
            ("chi_1", self.chi_1),
            ("leakage_tolerance", self.leakage_tolerance),
            ("xi_ratio", self.xi_ratio),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("readout_scale", self.readout_scale), ("parity_contrast", self.parity_contrast)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParams(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.p_exc) {
            return Err(Error::InvalidParams(format!("p_exc must lie in [0, 1), got {}", self.p_exc)));
        }
        let non_negative = [
            ("g", self.g),
            ("ring_time", self.ring_time),
            ("readout_time", self.readout_time),
            ("drive_dephasing_factor", self.drive_dephasing_factor),
            ("kappa_tilde", self.kappa_tilde),
            ("alpha", self.alpha),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Combined relaxation time of a single excitation shared by both modes.
    pub fn effective_tau1(&self) -> f64 {
        2.0 / (1.0 / self.t1_a + 1.0 / self.t1_b)
    }

    /// Decay time of the single-excitation oscillation contrast from dephasing.
    pub fn effective_tau_phi(&self) -> f64 {
        2.0 / (self.drive_dephasing_factor * (1.0 / self.tphi_a + 1.0 / self.tphi_b))
    }

    /// Per-photon DPS phase rate (rad/µs).
    pub fn dps_rate(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.chi_1
    }

    /// Split `|ξ₁||ξ₂|` into magnitudes with ratio `xi_ratio`.
    pub fn split_drive_product(&self, product: f64) -> (f64, f64) {
        let p = product.max(0.0);
        ((p * self.xi_ratio).sqrt(), (p / self.xi_ratio).sqrt())
    }
}

/// One RF drive on the coupler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveTone {
    pub epsilon: Complex64,
    pub omega_d: f64,
    pub ring_time: f64,
}

impl DriveTone {
    pub fn new(epsilon: Complex64, omega_d: f64) -> Self {
        DriveTone { epsilon, omega_d, ring_time: 0.1 }
    }
}

/// Normalized displaced-frame amplitude `ξ = -iε / (κ̃/2 + i(ω_ge - ω_d))`.
pub fn drive_amplitude(tone: &DriveTone, params: &DeviceParams) -> Result<Complex64> {
    let denom = Complex64::new(params.kappa_tilde / 2.0, params.omega_ge - tone.omega_d);
    if denom.re == 0.0 && denom.im == 0.0 {
        return Err(Error::ResonantDriveUndefined);
    }
    Ok(Complex64::new(0.0, -1.0) * tone.epsilon / denom)
}

/// Drive detuning from the coupler used in the Stark-shift correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detuning {
    /// `|δ| ≫ α`: correction factor is 1.
    Far,
    Finite(f64),
}

/// AC Stark shift of the coupler, `-2α|ξ|² · δ/(δ+α)`.
pub fn stark_shift(xi: Complex64, params: &DeviceParams, delta: Detuning) -> Result<f64> {
    let base = -2.0 * params.alpha * xi.norm_sqr();
    match delta {
        Detuning::Far => Ok(base),
        Detuning::Finite(d) => {
            if d + params.alpha == 0.0 {
                return Err(Error::SingularCorrection);
            }
            Ok(base * d / (d + params.alpha))
        }
    }
}

/// Bilinear coupling magnitude `g = sqrt(χ_ac χ_bc) |ξ₁||ξ₂|`.
pub fn coupling_strength(params: &DeviceParams, xi1: Complex64, xi2: Complex64) -> Result<f64> {
    if params.chi_ac < 0.0 || params.chi_bc < 0.0 {
        return Err(Error::InvalidParams("dispersive shifts under the square root must be non-negative".into()));
    }
    Ok((params.chi_ac * params.chi_bc).sqrt() * xi1.norm() * xi2.norm())
}

/// Corrected coupling `g̃ = g / (1 + 2α/(δ + d₂ + d_a + d_b))`.
///
/// `delta`, `d2`, `da`, `db` are the detunings of drive 1, drive 2, Alice and
/// Bob from the coupler frequency.
pub fn coupling_correction(g: f64, params: &DeviceParams, delta: f64, d2: f64, da: f64, db: f64) -> Result<f64> {
    if params.alpha == 0.0 {
        return Ok(g);
    }
    let sum = delta + d2 + da + db;
    if sum == 0.0 || sum == -2.0 * params.alpha {
        return Err(Error::InvalidDetunings);
    }
    Ok(g / (1.0 + 2.0 * params.alpha / sum))
}

/// Inherited cavity decay through the coupler, `|λ/Δ|² γ`.
pub fn inverse_purcell(lambda_coupling: f64, detuning: f64, gamma: f64) -> Result<f64> {
    if detuning == 0.0 {
        return Err(Error::ResonantUndefined);
    }
    Ok((lambda_coupling / detuning).powi(2) * gamma)
}

/// 50:50 beamsplitter time `1/(8g)` for cyclic `g`.
pub fn bs_duration(g: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::InvalidCoupling(g));
    }
    Ok(1.0 / (8.0 * g))
}
