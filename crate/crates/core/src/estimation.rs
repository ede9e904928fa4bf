//! Nonlinear least squares for oscillation and decay traces.
//!
//! Models are fitted internally in decay *rates* (`γ = 1/τ`) so that an
//! undamped trace (`γ = 0`) sits inside the parameter space; results are
//! reported in times.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `A e^{-t/τ₁} [1 + e^{-t/τ_φ} sin(2πft + φ₀)] / 2 + c`
    DecayingSinusoid,
    /// `A e^{-t/τ} + c`
    Exponential,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::DecayingSinusoid => "decaying-sinusoid",
            FitModel::Exponential => "exponential",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FitModel::DecayingSinusoid => &["A", "tau1", "tau_phi", "f", "phi0", "c"],
            FitModel::Exponential => &["A", "tau", "c"],
        }
    }

    pub fn param_units(self) -> &'static [&'static str] {
        match self {
            FitModel::DecayingSinusoid => &["1", "us", "us", "MHz", "rad", "1"],
            FitModel::Exponential => &["1", "us", "1"],
        }
    }

    pub fn arity(self) -> usize {
        self.param_names().len()
    }

    /// Indices of parameters stored as rates internally.
    fn rate_slots(self) -> &'static [usize] {
        match self {
            FitModel::DecayingSinusoid => &[1, 2],
            FitModel::Exponential => &[1],
        }
    }

    fn to_internal(self, public: &[f64]) -> Vec<f64> {
        let mut q = public.to_vec();
        for &i in self.rate_slots() {
            q[i] = 1.0 / q[i];
        }
        q
    }

    fn to_public(self, q: &[f64]) -> Vec<f64> {
        let mut p = q.to_vec();
        for &i in self.rate_slots() {
            p[i] = if q[i] == 0.0 { f64::INFINITY } else { 1.0 / q[i] };
        }
        p
    }

    /// Model value at `t` for public parameters.
    pub fn eval(self, public: &[f64], t: f64) -> f64 {
        self.eval_internal(&self.to_internal(public), t)
    }

    fn eval_internal(self, q: &[f64], t: f64) -> f64 {
        match self {
            FitModel::DecayingSinusoid => {
                let (a, g1, gp, f, p0, c) = (q[0], q[1], q[2], q[3], q[4], q[5]);
                let s = (TAU * f * t + p0).sin();
                a * (-g1 * t).exp() * (1.0 + (-gp * t).exp() * s) / 2.0 + c
            }
            FitModel::Exponential => q[0] * (-q[1] * t).exp() + q[2],
        }
    }

    /// Derivatives with respect to the internal (rate) parameters.
    fn jacobian_row(self, q: &[f64], t: f64) -> Vec<f64> {
        match self {
            FitModel::DecayingSinusoid => {
                let (a, g1, gp, f, p0) = (q[0], q[1], q[2], q[3], q[4]);
                let e1 = (-g1 * t).exp();
                let ep = (-gp * t).exp();
                let arg = TAU * f * t + p0;
                let (s, c) = arg.sin_cos();
                let base = e1 * (1.0 + ep * s) / 2.0;
                vec![
                    base,
                    -t * a * base,
                    -t * a * e1 * ep * s / 2.0,
                    a * e1 * ep * c * TAU * t / 2.0,
                    a * e1 * ep * c / 2.0,
                    1.0,
                ]
            }
            FitModel::Exponential => {
                let e = (-q[1] * t).exp();
                vec![e, -t * q[0] * e, 1.0]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub names: Vec<String>,
    pub units: Vec<String>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Gauss-Newton covariance in the internal rate parameterization.
    pub covariance: Vec<Vec<f64>>,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.estimates[i])
    }
}

/// Max deviation between the analytic Jacobian and central differences,
/// each column normalized by its largest analytic entry.
pub fn gradient_check(model: FitModel, params: &[f64], t: &[f64]) -> f64 {
    let q = model.to_internal(params);
    let mut worst: f64 = 0.0;
    for j in 0..q.len() {
        let h = if q[j] == 0.0 { 1e-6 } else { 1e-6 * q[j].abs() };
        let mut up = q.clone();
        let mut down = q.clone();
        up[j] += h;
        down[j] -= h;
        let analytic: Vec<f64> = t.iter().map(|&ti| model.jacobian_row(&q, ti)[j]).collect();
        let scale = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (k, &ti) in t.iter().enumerate() {
            let fd = (model.eval_internal(&up, ti) - model.eval_internal(&down, ti)) / (2.0 * h);
            let dev = (fd - analytic[k]).abs() / if scale > 0.0 { scale } else { 1.0 };
            worst = worst.max(dev);
        }
    }
    worst
}

fn check_data(t: &[f64], y: &[f64], min_points: usize) -> Result<f64> {
    if t.len() != y.len() {
        return Err(Error::InsufficientData(format!("{} times but {} values", t.len(), y.len())));
    }
    if t.len() < min_points {
        return Err(Error::InsufficientData(format!("need at least {min_points} points, got {}", t.len())));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InsufficientData("non-finite data".into()));
    }
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let scale = lo.abs().max(hi.abs());
    if hi - lo <= 1e-12 * scale.max(1e-300) {
        return Err(Error::FitDegenerate("data are constant".into()));
    }
    Ok(scale)
}

/// Linear least squares `min |B x - y|`.
fn linear_fit(basis: &DMatrix<f64>, y: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let svd = basis.clone().svd(true, true);
    let x = svd.solve(y, 1e-12).ok()?;
    let r = basis * &x - y;
    Some((x, r.norm_squared()))
}

struct Problem<'a> {
    model: FitModel,
    t: &'a [f64],
    y: Vec<f64>,
}

impl Problem<'_> {
    fn residuals(&self, q: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.t.len(), self.t.iter().zip(&self.y).map(|(&t, &y)| y - self.model.eval_internal(q, t)))
    }

    fn jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.t.len(), q.len());
        for (i, &t) in self.t.iter().enumerate() {
            for (k, v) in self.model.jacobian_row(q, t).into_iter().enumerate() {
                j[(i, k)] = v;
            }
        }
        j
    }

    /// Levenberg-Marquardt with Marquardt diagonal scaling.
    fn solve(&self, mut q: Vec<f64>) -> Result<(Vec<f64>, f64, usize, bool, f64, DMatrix<f64>)> {
        let mut r = self.residuals(&q);
        let mut rss = r.norm_squared();
        let mut lambda = 1e-3;
        let mut grad_norm = f64::INFINITY;
        for it in 1..=MAX_ITERATIONS {
            let j = self.jacobian(&q);
            let jtj = j.transpose() * &j;
            let g = j.transpose() * &r;
            grad_norm = g.norm();
            if grad_norm < 1e-9 {
                return Ok((q, rss, it, true, grad_norm, jtj));
            }
            let mut accepted = false;
            for _ in 0..40 {
                let mut a = jtj.clone();
                for k in 0..a.nrows() {
                    a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
                }
                let Some(delta) = a.clone().cholesky().map(|c| c.solve(&g)).or_else(|| a.lu().solve(&g)) else {
                    lambda *= 10.0;
                    continue;
                };
                let trial: Vec<f64> = q.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
                let r_new = self.residuals(&trial);
                let rss_new = r_new.norm_squared();
                if rss_new.is_finite() && rss_new <= rss {
                    let rel = (rss - rss_new) / rss.max(1e-300);
                    let step = delta.norm() / (1e-12 + q.iter().map(|v| v * v).sum::<f64>().sqrt());
                    q = trial;
                    r = r_new;
                    rss = rss_new;
                    lambda = (lambda / 10.0).max(1e-15);
                    accepted = true;
                    if rss == 0.0 || (rel < 1e-10 && step < 1e-8) {
                        let j = self.jacobian(&q);
                        let g = j.transpose() * &r;
                        return Ok((q, rss, it, true, g.norm(), j.transpose() * j));
                    }
                    break;
                }
                lambda *= 10.0;
            }
            if !accepted {
                // no downhill step at any damping: a stationary point
                return Ok((q, rss, it, grad_norm < 1e-6, grad_norm, jtj));
            }
        }
        Err(Error::FitFailed { iterations: MAX_ITERATIONS, residual: rss, gradient: grad_norm })
    }
}

fn finish(model: FitModel, q: Vec<f64>, rss: f64, iterations: usize, converged: bool, grad: f64, jtj: DMatrix<f64>, n: usize, scale: f64) -> FitResult {
    // undo the y normalization: amplitude and offset carry the scale
    let mut q = q;
    let amp_slots: &[usize] = match model {
        FitModel::DecayingSinusoid => &[0, 5],
        FitModel::Exponential => &[0, 2],
    };
    for &i in amp_slots {
        q[i] *= scale;
    }
    let rss = rss * scale * scale;
    let p = q.len();
    let sigma2 = if n > p { rss / (n - p) as f64 } else { 0.0 };
    let inv = jtj.try_inverse().unwrap_or_else(|| DMatrix::from_element(p, p, f64::NAN));
    let mut cov = vec![vec![0.0; p]; p];
    for i in 0..p {
        for k in 0..p {
            let si = if amp_slots.contains(&i) { scale } else { 1.0 };
            let sk = if amp_slots.contains(&k) { scale } else { 1.0 };
            cov[i][k] = sigma2 * inv[(i, k)] * si * sk / (scale * scale);
        }
    }
    let mut std_errors: Vec<f64> = (0..p).map(|i| cov[i][i].max(0.0).sqrt()).collect();
    for &i in model.rate_slots() {
        // σ_τ = σ_γ / γ²
        std_errors[i] = if q[i] == 0.0 { f64::INFINITY } else { std_errors[i] / (q[i] * q[i]) };
    }
    let mut estimates = model.to_public(&q);
    if let FitModel::DecayingSinusoid = model {
        // canonical sign: positive frequency, phase in [0, 2π)
        if estimates[3] < 0.0 {
            estimates[3] = -estimates[3];
            estimates[4] = std::f64::consts::PI - estimates[4];
        }
        estimates[4] = estimates[4].rem_euclid(TAU);
    }
    FitResult {
        model,
        names: model.param_names().iter().map(|s| s.to_string()).collect(),
        units: model.param_units().iter().map(|s| s.to_string()).collect(),
        estimates,
        std_errors,
        covariance: cov,
        rss,
        iterations,
        converged,
        gradient_norm: grad,
    }
}

/// Frequency with the largest Fourier magnitude of the mean-removed data,
/// scanned on a grid four times finer than the record length allows.
fn dominant_frequency(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let span = t[n - 1] - t[0];
    let df = 1.0 / (4.0 * span);
    let nyquist = (n - 1) as f64 / (2.0 * span);
    let mut best = (0.0, df);
    let mut f = df;
    while f <= nyquist {
        let (mut re, mut im) = (0.0, 0.0);
        for (ti, yi) in t.iter().zip(y) {
            let (s, c) = (TAU * f * ti).sin_cos();
            re += (yi - mean) * c;
            im += (yi - mean) * s;
        }
        let mag = re * re + im * im;
        if mag > best.0 {
            best = (mag, f);
        }
        f += df;
    }
    best.1
}

pub fn fit_decaying_sinusoid(t: &[f64], y: &[f64]) -> Result<FitResult> {
    let scale = check_data(t, y, 12)?;
    let yn: Vec<f64> = y.iter().map(|v| v / scale).collect();
    let span = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - t.iter().cloned().fold(f64::INFINITY, f64::min);
    let f0 = dominant_frequency(t, &yn);
    if span * f0 < 1.9 {
        return Err(Error::InsufficientData(format!(
            "record spans {:.2} oscillation periods, need at least 2",
            span * f0
        )));
    }
    let model = FitModel::DecayingSinusoid;
    let problem = Problem { model, t, y: yn.clone() };

    // refine the frequency and seed amplitude, phase and envelope with
    // linear fits on {e^{-γt}, e^{-γt} sin, e^{-γt} cos, 1}
    let n = t.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in -8..=8 {
        let f = f0 + k as f64 / (32.0 * span);
        for gamma in [0.0, 0.1 / span, 0.3 / span, 1.0 / span, 3.0 / span] {
            let basis = DMatrix::from_fn(n, 4, |i, c| {
                let e = (-gamma * t[i]).exp();
                match c {
                    0 => e,
                    1 => e * (TAU * f * t[i]).sin(),
                    2 => e * (TAU * f * t[i]).cos(),
                    _ => 1.0,
                }
            });
            let Some((x, rss)) = linear_fit(&basis, &DVector::from_vec(yn.clone())) else { continue };
            if best.as_ref().is_some_and(|b| b.0 <= rss) {
                continue;
            }
            let a = 2.0 * x[0];
            let osc = (x[1] * x[1] + x[2] * x[2]).sqrt();
            let phi0 = x[2].atan2(x[1]);
            let ratio = if a != 0.0 { (2.0 * osc / a.abs()).clamp(1e-6, 1.0) } else { 1.0 };
            let gp = -ratio.ln() / (0.5 * span);
            best = Some((rss, vec![a, gamma, gp, f, phi0, x[3]]));
        }
    }
    let q0 = best.ok_or_else(|| Error::FitDegenerate("no usable initial guess".into()))?.1;
    let (q, rss, it, conv, grad, jtj) = problem.solve(q0)?;
    Ok(finish(model, q, rss, it, conv, grad, jtj, n, scale))
}

pub fn fit_exponential(t: &[f64], y: &[f64]) -> Result<FitResult> {
    let scale = check_data(t, y, 4)?;
    let yn: Vec<f64> = y.iter().map(|v| v / scale).collect();
    let n = t.len();
    let span = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - t.iter().cloned().fold(f64::INFINITY, f64::min);
    let model = FitModel::Exponential;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..=60 {
        let gamma = 1e-3 / span * 10f64.powf(k as f64 / 10.0);
        let basis = DMatrix::from_fn(n, 2, |i, c| if c == 0 { (-gamma * t[i]).exp() } else { 1.0 });
        let Some((x, rss)) = linear_fit(&basis, &DVector::from_vec(yn.clone())) else { continue };
        if best.as_ref().map_or(true, |b| rss < b.0) {
            best = Some((rss, vec![x[0], gamma, x[1]]));
        }
    }
    let q0 = best.ok_or_else(|| Error::FitDegenerate("no usable initial guess".into()))?.1;
    let problem = Problem { model, t, y: yn };
    let (q, rss, it, conv, grad, jtj) = problem.solve(q0)?;
    Ok(finish(model, q, rss, it, conv, grad, jtj, n, scale))
}

/// `1/τ_BS = 1/(2τ₁) + 1/τ_φ`; either time may be infinite.
pub fn bs_decoherence_time(tau1: f64, tau_phi: f64) -> Result<f64> {
    if !(tau1 > 0.0 && tau_phi > 0.0) {
        return Err(Error::InvalidParams(format!("decoherence times must be positive, got {tau1} and {tau_phi}")));
    }
    Ok(1.0 / (1.0 / (2.0 * tau1) + 1.0 / tau_phi))
}

/// Fraction of the coherence budget spent in one 50:50 splitter, `T_BS/τ_BS`.
pub fn bs_infidelity(t_bs: f64, tau_bs: f64) -> Result<f64> {
    if !(t_bs > 0.0 && tau_bs > 0.0) {
        return Err(Error::InvalidParams(format!("durations must be positive, got {t_bs} and {tau_bs}")));
    }
    Ok(t_bs / tau_bs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomContrast {
    /// `(P₁₁(0) - min P₁₁) / P₁₁(0)`
    pub contrast: f64,
    /// `(max - min) / (max + min)`
    pub visibility: f64,
    /// Dip depth relative to the 50% dip of distinguishable photons.
    pub relative_to_classical: f64,
    pub p11_min: f64,
    pub t_min: f64,
}

/// Dip depth of a `P₁₁` trace; the first sample must be at zero delay.
pub fn hom_contrast(t: &[f64], p11: &[f64]) -> Result<HomContrast> {
    if t.is_empty() || t.len() != p11.len() {
        return Err(Error::InvalidDataset("need matching, non-empty time and P11 columns".into()));
    }
    if t[0] != 0.0 {
        return Err(Error::InvalidDataset(format!("baseline at t = 0 missing (first time is {})", t[0])));
    }
    let base = p11[0];
    if !(base > 0.0) {
        return Err(Error::InvalidDataset("P11 baseline is zero".into()));
    }
    let (imin, &pmin) = p11
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let pmax = p11.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let contrast = (base - pmin) / base;
    Ok(HomContrast {
        contrast,
        visibility: (pmax - pmin) / (pmax + pmin),
        relative_to_classical: contrast / 0.5,
        p11_min: pmin,
        t_min: t[imin],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, span: f64) -> Vec<f64> {
        (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn recovers_sinusoid() {
        let t = grid(201, 30.0);
        let truth = [0.9, 400.0, 800.0, 0.068, 1.3, 0.05];
        let y: Vec<f64> = t.iter().map(|&x| FitModel::DecayingSinusoid.eval(&truth, x)).collect();
        let fit = fit_decaying_sinusoid(&t, &y).unwrap();
        for name in ["tau1", "tau_phi", "f"] {
            let i = fit.names.iter().position(|n| n == name).unwrap();
            assert!((fit.estimates[i] / truth[i] - 1.0).abs() < 1e-3, "{name}: {:?}", fit.estimates);
        }
        let sy: f64 = y.iter().map(|v| v * v).sum();
        assert!(fit.rss < 1e-16 * sy, "rss {}", fit.rss);
    }

    #[test]
    fn undamped_cosine_frequency() {
        let g = 0.034;
        let t = grid(121, 30.0);
        let y: Vec<f64> = t.iter().map(|&x| (TAU * g * x).cos().powi(2)).collect();
        let fit = fit_decaying_sinusoid(&t, &y).unwrap();
        assert!((fit.get("f").unwrap() / (2.0 * g) - 1.0).abs() < 5e-3);
    }

    #[test]
    fn degenerate_and_short() {
        let t = grid(50, 30.0);
        assert!(matches!(fit_decaying_sinusoid(&t, &[0.3; 50]), Err(Error::FitDegenerate(_))));
        assert!(matches!(fit_exponential(&t, &[0.0; 50]), Err(Error::FitDegenerate(_))));
        assert!(matches!(fit_decaying_sinusoid(&t[..5], &[0.1, 0.2, 0.3, 0.4, 0.5]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn recovers_exponential() {
        let t = grid(40, 100.0);
        let y: Vec<f64> = t.iter().map(|&x| (-x / 450.0).exp()).collect();
        let fit = fit_exponential(&t, &y).unwrap();
        assert!((fit.get("tau").unwrap() / 450.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn decoherence_composition() {
        assert_eq!(bs_decoherence_time(400.0, 800.0).unwrap(), 400.0);
        assert_eq!(bs_decoherence_time(300.0, f64::INFINITY).unwrap(), 600.0);
        assert_eq!(bs_decoherence_time(f64::INFINITY, 700.0).unwrap(), 700.0);
        let (t1, tp) = (437.0, 913.0);
        let out = bs_decoherence_time(t1, tp).unwrap();
        assert!((1.0 / out - (1.0 / (2.0 * t1) + 1.0 / tp)).abs() < 1e-18);
        assert!(bs_decoherence_time(0.0, 1.0).is_err());
    }

    #[test]
    fn infidelity() {
        assert!((bs_infidelity(3.676, 400.0).unwrap() - 0.00919).abs() < 1e-5);
        assert_eq!(bs_infidelity(5.0, 5.0).unwrap(), 1.0);
        let a = bs_infidelity(crate::device::bs_duration(0.034).unwrap(), 400.0).unwrap();
        let b = bs_infidelity(crate::device::bs_duration(0.017).unwrap(), 400.0).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn contrast_cases() {
        let t = grid(41, 2.0 * crate::device::bs_duration(0.034).unwrap());
        let ideal: Vec<f64> = t.iter().map(|&x| (2.0 * TAU * 0.034 * x).cos().powi(2)).collect();
        assert!((hom_contrast(&t, &ideal).unwrap().contrast - 1.0).abs() < 1e-12);
        let classical: Vec<f64> =
            t.iter().map(|&x| crate::interferometry::distinguishable_p11(TAU * 0.034 * x)).collect();
        assert!(hom_contrast(&t, &classical).unwrap().contrast <= 0.5 + 1e-12);
        assert!(matches!(hom_contrast(&t[1..], &ideal[1..]), Err(Error::InvalidDataset(_))));
    }

    #[test]
    fn jacobians_match_differences() {
        let t = grid(60, 30.0);
        assert!(gradient_check(FitModel::DecayingSinusoid, &[0.9, 400.0, 800.0, 0.068, 1.3, 0.05], &t) < 1e-5);
        assert!(gradient_check(FitModel::Exponential, &[1.0, 450.0, 0.1], &t) < 1e-6);
        assert_eq!(gradient_check(FitModel::Exponential, &[1.0, 450.0, 0.1], &[]), 0.0);
    }
}
