use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2, TAU};
use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use qmem::config::{load_config, parse_config, to_config_string};
use qmem::device::{bs_duration, coupling_correction, coupling_strength, stark_shift, Detuning};
use qmem::estimation::{bs_decoherence_time, fit_decaying_sinusoid, fit_exponential, hom_contrast, FitResult};
use qmem::fock::coherent_state;
use qmem::interferometry::{beamsplitter, dps, BeamsplitterSpec};
use qmem::measurement::{joint_number_probs, overlap_via_parity};
use qmem::program::{parse, sweep_dataset, sweep_grid, Dataset, ExecOptions, Program};
use qmem::{DeviceParams, Error, GateMode, QuantumState, C64};

use crate::manifest::{self, RunManifest};
use crate::{shots, Cli, Command, Dims, UsageError};

/// Parameters and sources a run was built from.
struct Source {
    params: DeviceParams,
    config_path: Option<String>,
    program_path: Option<String>,
    program: Option<String>,
}

struct Artifact {
    name: String,
    text: String,
}

impl Artifact {
    fn csv(name: &str, ds: &Dataset) -> Self {
        Artifact { name: name.to_string(), text: ds.to_csv() }
    }

    fn json(name: &str, value: &Value) -> anyhow::Result<Self> {
        Ok(Artifact { name: name.to_string(), text: serde_json::to_string_pretty(value)? + "\n" })
    }
}

pub fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Replay { manifest: path } => {
            let m = manifest::load(path)?;
            if matches!(m.invocation.command, Command::Replay { .. }) {
                return Err(UsageError("manifest records a replay, not a run".into()).into());
            }
            let mut inv = m.invocation.clone();
            let dir = path.parent().unwrap_or(Path::new("."));
            inv.out = Some(cli.out.clone().unwrap_or_else(|| dir.join("replay")));
            let source = Source {
                params: parse_config(&m.config)?,
                config_path: m.config_path,
                program_path: m.program_path,
                program: m.program,
            };
            run(&inv, source)
        }
        command => {
            let mut config_path = cli.config.clone();
            let (program_path, program) = match command {
                Command::Run { path } => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| UsageError(format!("cannot read program {}: {e}", path.display())))?;
                    // a `config` header line applies unless --config overrides it
                    if config_path.is_none() {
                        let header = parse(&text).map_err(Error::from)?.header;
                        let dir = path.parent().unwrap_or(Path::new("."));
                        config_path = header.config.map(|c| dir.join(c));
                    }
                    (Some(path.display().to_string()), Some(text))
                }
                _ => (None, None),
            };
            let params = match &config_path {
                Some(p) => load_config(p)?,
                None => DeviceParams::default(),
            };
            let source = Source {
                params,
                config_path: config_path.map(|p| p.display().to_string()),
                program_path,
                program,
            };
            run(cli, source)
        }
    }
}

fn run(inv: &Cli, source: Source) -> anyhow::Result<()> {
    let p = &source.params;
    let artifacts = match &inv.command {
        Command::Rabi { g, t_max, steps } => rabi(inv, p, *g, *t_max, *steps)?,
        Command::Hom { t_max, steps, distinguishable } => hom(inv, p, *t_max, *steps, *distinguishable)?,
        Command::Overlap { alpha_max, alpha_steps, phase_steps } => overlap(inv, p, *alpha_max, *alpha_steps, *phase_steps)?,
        Command::Mz { steps_per_gate, no_dps } => mz(inv, p, *steps_per_gate, *no_dps)?,
        Command::Multiphoton { t_max, steps, coherent_dim } => multiphoton(inv, p, *t_max, *steps, *coherent_dim)?,
        Command::Calibrate { xi_min, xi_max, xi_steps, delta1, delta2 } => {
            calibrate(p, *xi_min, *xi_max, *xi_steps, *delta1, *delta2)?
        }
        Command::Run { .. } => {
            let text = source.program.as_deref().expect("run carries its program text");
            run_program(inv, p, text, source.program_path.as_deref())?
        }
        Command::Replay { .. } => unreachable!("replay is resolved before running"),
    };

    let out = inv.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    for a in &artifacts {
        let path = out.join(&a.name);
        std::fs::write(&path, &a.text).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    let m = RunManifest {
        command: inv.command.name().to_string(),
        invocation: inv.clone(),
        config_path: source.config_path,
        config: to_config_string(p),
        program_path: source.program_path,
        program: source.program,
        outputs: artifacts.iter().map(|a| a.name.clone()).collect(),
        seed: inv.shots.map(|_| inv.seed),
        shots: inv.shots,
        versions: manifest::versions(),
    };
    manifest::write(&out, &m)?;
    println!("wrote {}", out.join(manifest::MANIFEST_NAME).display());
    Ok(())
}

fn mode(inv: &Cli) -> GateMode {
    inv.mode.unwrap_or_default()
}

fn dims(inv: &Cli, default: Dims) -> Dims {
    inv.dims.unwrap_or(default)
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

fn header(inv: &Cli, d: Dims) -> String {
    format!("dims {} {}\nmode {}\nspam {}\n", d.0, d.1, mode(inv).as_str(), on_off(inv.spam))
}

fn select(ds: &Dataset, names: &[&str]) -> anyhow::Result<Dataset> {
    let idx: Vec<usize> = names
        .iter()
        .map(|n| ds.column_index(n).ok_or_else(|| Error::InvalidDataset(format!("missing column {n}"))))
        .collect::<Result<_, _>>()?;
    let mut out = Dataset::new(names.iter().map(|s| s.to_string()).collect());
    for r in &ds.rows {
        out.push(idx.iter().map(|&i| r[i]).collect());
    }
    Ok(out)
}

fn add_column(ds: &mut Dataset, name: &str, f: impl Fn(&[f64]) -> f64) {
    for r in &mut ds.rows {
        let v = f(r);
        r.push(v);
    }
    ds.columns.push(name.to_string());
}

fn maybe_sample(inv: &Cli, ds: Dataset) -> Dataset {
    match inv.shots {
        Some(n) => shots::sample(&ds, n, inv.seed),
        None => ds,
    }
}

fn run_sweep(text: &str, params: &DeviceParams) -> anyhow::Result<Dataset> {
    let program = parse(text).map_err(Error::from)?;
    Ok(sweep_dataset(&program, params, &ExecOptions::default())?)
}

fn fit_json(fit: &FitResult) -> Value {
    let mut params = Map::new();
    for (i, name) in fit.names.iter().enumerate() {
        params.insert(
            name.clone(),
            json!({ "value": fit.estimates[i], "std_error": fit.std_errors[i], "unit": fit.units[i] }),
        );
    }
    json!({
        "model": fit.model.name(),
        "converged": fit.converged,
        "iterations": fit.iterations,
        "rss": fit.rss,
        "gradient_norm": fit.gradient_norm,
        "parameters": params,
    })
}

/// Insufficient data is reported in the JSON instead of failing the run.
fn refused(e: &Error) -> bool {
    matches!(e, Error::InsufficientData(_))
}

/// A fitted decay far slower than the record is indistinguishable from none.
fn resolved(tau: f64, span: f64) -> f64 {
    if tau > 0.0 && tau <= 1e6 * span {
        tau
    } else {
        f64::INFINITY
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn rabi(inv: &Cli, params: &DeviceParams, g: Option<f64>, t_max: f64, steps: usize) -> anyhow::Result<Vec<Artifact>> {
    let mut params = params.clone();
    if let Some(g) = g {
        if !(g > 0.0) {
            return Err(Error::InvalidCoupling(g).into());
        }
        params.g = g;
    }
    let d = dims(inv, Dims(3, 3));
    let text = format!(
        "{}sweep t from 0 to {t_max} steps {steps}\nprep fock 1 0\nbs t=$t\nmeasure joint\n",
        header(inv, d)
    );
    let ds = run_sweep(&text, &params)?;
    let mut data = maybe_sample(inv, select(&ds, &["t", "duration", "P1_0", "P0_1"])?);
    add_column(&mut data, "P10_plus_P01", |r| r[2] + r[3]);

    // Physical decay runs on elapsed time; drop points shorter than a ramp.
    let physical = mode(inv) == GateMode::Physical;
    let rows: Vec<&Vec<f64>> = data.rows.iter().filter(|r| !physical || r[0] >= params.ring_time).collect();
    let t: Vec<f64> = rows.iter().map(|r| if physical { r[1] } else { r[0] }).collect();
    let p10: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let sum: Vec<f64> = rows.iter().map(|r| r[4]).collect();

    let mut report = json!({ "mode": mode(inv).as_str(), "g_config": params.g, "time_axis": if physical { "duration" } else { "t" } });
    match fit_decaying_sinusoid(&t, &p10) {
        Ok(fit) => {
            let span = t.last().copied().unwrap_or(0.0) - t.first().copied().unwrap_or(0.0);
            let f = fit.get("f").unwrap_or(f64::NAN);
            let tau1 = resolved(fit.get("tau1").unwrap_or(f64::NAN), span);
            let tau_phi = resolved(fit.get("tau_phi").unwrap_or(f64::NAN), span);
            let g_fit = f / 2.0;
            let tau_bs = bs_decoherence_time(tau1, tau_phi).ok().and_then(finite);
            let t_bs = bs_duration(g_fit).ok();
            let infidelity = match (t_bs, tau_bs) {
                (Some(a), Some(b)) => Some(a / b),
                _ => None,
            };
            report["fit"] = fit_json(&fit);
            report["derived"] = json!({
                "f": f,
                "g": g_fit,
                "tau1": finite(tau1),
                "tau_phi": finite(tau_phi),
                "tau_bs": tau_bs,
                "t_bs": t_bs,
                "infidelity": infidelity,
            });
            println!("f = {f}\ng = {g_fit}\ntau1 = {tau1}\ntau_phi = {tau_phi}");
            if let (Some(tb), Some(inf)) = (tau_bs, infidelity) {
                println!("tau_bs = {tb}\ninfidelity = {inf}");
            }
        }
        Err(e) if refused(&e) => {
            eprintln!("fit refused: {e}");
            report["fit_error"] = json!(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    if physical {
        match fit_exponential(&t, &sum) {
            Ok(fit) => {
                println!("envelope tau = {}", fit.get("tau").unwrap_or(f64::NAN));
                report["envelope"] = fit_json(&fit);
            }
            Err(e) => report["envelope_error"] = json!(e.to_string()),
        }
    }
    Ok(vec![Artifact::csv("rabi.csv", &data), Artifact::json("rabi_fit.json", &report)?])
}

fn hom(inv: &Cli, params: &DeviceParams, t_max: Option<f64>, steps: usize, distinguishable: bool) -> anyhow::Result<Vec<Artifact>> {
    let t_bs = bs_duration(params.g)?;
    let t_max = t_max.unwrap_or(3.0 * t_bs);
    let d = dims(inv, Dims(6, 6));
    let sweep = |prep: &str| {
        format!("{}sweep t from 0 to {t_max} steps {steps}\nprep fock {prep}\nbs t=$t\nmeasure joint\n", header(inv, d))
    };
    let data = if distinguishable {
        // each photon crosses independently
        let a = run_sweep(&sweep("1 0"), params)?;
        let b = run_sweep(&sweep("0 1"), params)?;
        let col = |ds: &Dataset, n: &str| ds.column(n).expect("joint columns present");
        let (a10, a01, b10, b01) = (col(&a, "P1_0"), col(&a, "P0_1"), col(&b, "P1_0"), col(&b, "P0_1"));
        let mut out = Dataset::new(["t", "duration", "P1_1", "P2_0", "P0_2"].map(String::from).to_vec());
        for (i, r) in a.rows.iter().enumerate() {
            let p11 = a10[i] * b01[i] + a01[i] * b10[i];
            out.push(vec![r[0], r[1], p11, a10[i] * b10[i], a01[i] * b01[i]]);
        }
        out
    } else {
        select(&run_sweep(&sweep("1 1"), params)?, &["t", "duration", "P1_1", "P2_0", "P0_2"])?
    };
    let mut data = maybe_sample(inv, data);
    add_column(&mut data, "P20_plus_P02", |r| r[3] + r[4]);

    let t = data.column("t").expect("t column");
    let p11 = data.column("P1_1").expect("P1_1 column");
    let c = hom_contrast(&t, &p11)?;
    let nearest = |x: f64| {
        let i = t.iter().enumerate().min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs())).map(|(i, _)| i);
        i.map(|i| p11[i])
    };
    let report = json!({
        "mode": mode(inv).as_str(),
        "distinguishable": distinguishable,
        "t_bs": t_bs,
        "contrast": c.contrast,
        "visibility": c.visibility,
        "relative_to_classical": c.relative_to_classical,
        "p11_min": c.p11_min,
        "t_min": c.t_min,
        "p11_at_t_bs": nearest(t_bs),
        "p11_at_2t_bs": if t_max >= 2.0 * t_bs { nearest(2.0 * t_bs) } else { None },
    });
    println!("contrast = {}\nvisibility = {}\nrelative_to_classical = {}", c.contrast, c.visibility, c.relative_to_classical);
    Ok(vec![Artifact::csv("hom.csv", &data), Artifact::json("hom_contrast.json", &report)?])
}

/// Largest amplitude up to √3 whose swap-test output, a coherent state of
/// amplitude up to √2·α, stays off the top level.
fn fitting_alpha(dim: usize, tolerance: f64) -> f64 {
    let fits = |alpha: f64| {
        coherent_state(dim, C64::new(SQRT_2 * alpha, 0.0)).is_ok_and(|s| s.top_level_population(0) <= tolerance)
    };
    let mut alpha = 3f64.sqrt();
    while alpha > 0.0 && !fits(alpha) {
        alpha = ((alpha - 0.01) * 100.0).round() / 100.0;
    }
    alpha.max(0.0)
}

fn overlap(
    inv: &Cli,
    params: &DeviceParams,
    alpha_max: Option<f64>,
    alpha_steps: Option<usize>,
    phase_steps: Option<usize>,
) -> anyhow::Result<Vec<Artifact>> {
    let m = mode(inv);
    let (dim, a_steps, p_steps) = match m {
        GateMode::Ideal => (dims(inv, Dims(24, 24)).0, alpha_steps.unwrap_or(7), phase_steps.unwrap_or(25)),
        GateMode::Physical => (dims(inv, Dims(8, 8)).0, alpha_steps.unwrap_or(4), phase_steps.unwrap_or(9)),
    };
    let alpha_max = alpha_max.unwrap_or_else(|| fitting_alpha(dim, params.leakage_tolerance));
    let alphas = sweep_grid(0.0, alpha_max, a_steps);
    let phases = sweep_grid(0.0, TAU, p_steps);
    if alphas.is_empty() || phases.is_empty() {
        return Err(Error::EmptyGrid.into());
    }
    let grid: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| phases.iter().map(move |&p| (a, p))).collect();
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&(alpha, dphi)| -> qmem::Result<Vec<f64>> {
            let a = coherent_state(dim, C64::new(alpha, 0.0))?;
            let b = coherent_state(dim, C64::from_polar(alpha, dphi))?;
            let est = overlap_via_parity(&a, &b, params, m)?;
            let analytic = (-2.0 * alpha * alpha * (1.0 - dphi.cos())).exp();
            Ok(vec![alpha, dphi, est.value, est.ideal_value, analytic])
        })
        .collect::<qmem::Result<_>>()?;
    let mut data = Dataset::new(["alpha", "dphi", "overlap", "overlap_ideal", "overlap_analytic"].map(String::from).to_vec());
    for r in rows {
        data.push(r);
    }
    let mut data = maybe_sample(inv, data);
    let contrast = params.parity_contrast;
    add_column(&mut data, "overlap_scaled", |r| r[2] * contrast);
    Ok(vec![Artifact::csv("overlap.csv", &data)])
}

#[derive(Clone, Copy)]
enum Stage {
    Bs,
    Dps,
}

fn mz(inv: &Cli, params: &DeviceParams, steps_per_gate: usize, no_dps: bool) -> anyhow::Result<Vec<Artifact>> {
    use Stage::{Bs, Dps};
    if steps_per_gate == 0 {
        return Err(Error::EmptyGrid.into());
    }
    let d = dims(inv, Dims(4, 4));
    let m = mode(inv);
    let stages: Vec<Stage> = if no_dps { vec![Bs, Bs, Bs, Bs] } else { vec![Bs, Dps, Bs, Bs, Dps, Bs] };
    // branch phase π: e^{iπ/2} per Alice photon
    let dps_phase = FRAC_PI_2;
    let nominal = |s: Stage| -> qmem::Result<f64> {
        match s {
            Bs => bs_duration(params.g),
            Dps => Ok(dps_phase / params.dps_rate()),
        }
    };
    let apply = |state: &QuantumState, s: Stage, frac: f64| -> qmem::Result<(QuantumState, f64)> {
        let (out, rec) = match s {
            Bs => beamsplitter(state, &BeamsplitterSpec::new(FRAC_PI_4 * frac, 0.0, m), params)?,
            Dps => dps(state, dps_phase * frac, params, m)?,
        };
        Ok((out, rec.duration))
    };
    let row = |state: &QuantumState, t: f64, elapsed: f64, gate: usize| -> qmem::Result<Vec<f64>> {
        let p = joint_number_probs(state, params, inv.spam)?;
        Ok(vec![t, elapsed, gate as f64, p.get(1, 1), p.get(2, 0), p.get(0, 2)])
    };

    let space = qmem::ModeSpace::two_mode(d.0, d.1)?;
    let mut state = qmem::fock::fock_state(&space, &[1, 1])?;
    let (mut t, mut elapsed) = (0.0, 0.0);
    let mut data = Dataset::new(["t", "elapsed", "gate", "P1_1", "P2_0", "P0_2"].map(String::from).to_vec());
    data.push(row(&state, 0.0, 0.0, 0)?);
    for (k, &s) in stages.iter().enumerate() {
        let span = nominal(s)?;
        let points: Vec<(QuantumState, f64)> = (1..=steps_per_gate)
            .into_par_iter()
            .map(|j| apply(&state, s, j as f64 / steps_per_gate as f64))
            .collect::<qmem::Result<_>>()?;
        for (j, (st, dur)) in points.iter().enumerate() {
            let frac = (j + 1) as f64 / steps_per_gate as f64;
            data.push(row(st, t + frac * span, elapsed + dur, k + 1)?);
        }
        let (last, dur) = points.into_iter().last().expect("at least one step per gate");
        state = last;
        t += span;
        elapsed += dur;
    }
    Ok(vec![Artifact::csv("mz.csv", &maybe_sample(inv, data))])
}

fn multiphoton(
    inv: &Cli,
    params: &DeviceParams,
    t_max: Option<f64>,
    steps: usize,
    coherent_dim: Option<usize>,
) -> anyhow::Result<Vec<Artifact>> {
    let d = dims(inv, Dims(5, 5));
    if d.0 < 5 || d.1 < 5 {
        return Err(UsageError(format!("multiphoton needs dims >= 5,5, got {},{}", d.0, d.1)).into());
    }
    let t_bs = bs_duration(params.g)?;
    let t_max = t_max.unwrap_or(2.0 * t_bs);
    let text = format!("{}sweep t from 0 to {t_max} steps {steps}\nprep state21\nbs t=$t\nmeasure joint\n", header(inv, d));
    let ds = run_sweep(&text, params)?;
    let data = maybe_sample(inv, select(&ds, &["t", "duration", "P3_0", "P2_1", "P1_2", "P0_3"])?);

    let m = mode(inv);
    let cd = coherent_dim.unwrap_or(match m {
        GateMode::Ideal => 20,
        GateMode::Physical => 13,
    });
    let alpha = C64::new(2f64.sqrt(), 0.0);
    let mut state = coherent_state(cd, alpha)?.product(&coherent_state(cd, C64::new(0.0, 0.0))?)?;
    let mut coherent = Dataset::new(["stage", "elapsed", "nbar_a", "nbar_b"].map(String::from).to_vec());
    let mut elapsed = 0.0;
    for stage in 0..=2 {
        if stage > 0 {
            let (next, rec) = beamsplitter(&state, &BeamsplitterSpec::new(FRAC_PI_4, 0.0, m), params)?;
            state = next;
            elapsed += rec.duration;
        }
        coherent.push(vec![stage as f64, elapsed, state.mean_photon_number(0), state.mean_photon_number(1)]);
    }
    Ok(vec![Artifact::csv("multiphoton.csv", &data), Artifact::csv("multiphoton_coherent.csv", &coherent)])
}

fn calibrate(
    params: &DeviceParams,
    xi_min: f64,
    xi_max: f64,
    xi_steps: usize,
    delta1: f64,
    delta2: f64,
) -> anyhow::Result<Vec<Artifact>> {
    let grid = sweep_grid(xi_min, xi_max, xi_steps);
    if grid.is_empty() {
        return Err(Error::EmptyGrid.into());
    }
    let tau1 = params.effective_tau1();
    let tau_phi = params.effective_tau_phi();
    let tau_bs = bs_decoherence_time(tau1, tau_phi)?;
    let da = params.omega_a - params.omega_ge;
    let db = params.omega_b - params.omega_ge;
    let corrected = |product: f64| -> qmem::Result<(f64, f64, f64, f64)> {
        let (x1, x2) = params.split_drive_product(product);
        let g = coupling_strength(params, C64::new(x1, 0.0), C64::new(x2, 0.0))?;
        Ok((x1, x2, g, coupling_correction(g, params, delta1, delta2, da, db)?))
    };
    // excitation probability scales with the coupling, pinned at the operating point
    let g_per_product = corrected(1.0)?.3;
    let mut data = Dataset::new(
        [
            "xi_product",
            "xi1",
            "xi2",
            "g",
            "g_corrected",
            "t_bs",
            "infidelity_decoherence",
            "p_exc",
            "infidelity",
            "stark_1",
            "stark_2",
        ]
        .map(String::from)
        .to_vec(),
    );
    for &p in &grid {
        let (x1, x2, g, gt) = corrected(p)?;
        let row = if gt > 0.0 {
            let t_bs = bs_duration(gt)?;
            let p_exc = params.p_exc * gt / params.g;
            let inf = t_bs / tau_bs;
            vec![
                p,
                x1,
                x2,
                g,
                gt,
                t_bs,
                inf,
                p_exc,
                inf + p_exc,
                stark_shift(C64::new(x1, 0.0), params, Detuning::Finite(delta1))?,
                stark_shift(C64::new(x2, 0.0), params, Detuning::Finite(delta2))?,
            ]
        } else {
            // no drive: nothing to report
            vec![0.0; 11]
        };
        data.push(row);
    }
    let totals: Vec<f64> = data.rows.iter().map(|r| r[8]).filter(|&x| x > 0.0).collect();
    let (lo, hi) = totals.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let report = json!({
        "tau1": tau1,
        "tau_phi": tau_phi,
        "tau_bs": tau_bs,
        "operating_product": if g_per_product > 0.0 { Some(params.g / g_per_product) } else { None },
        "infidelity_min": finite(lo),
        "infidelity_max": if totals.is_empty() { None } else { Some(hi) },
        "infidelity_spread": if totals.is_empty() { None } else { Some(hi / lo) },
    });
    Ok(vec![Artifact::csv("calibrate.csv", &data), Artifact::json("calibrate.json", &report)?])
}

fn run_program(inv: &Cli, params: &DeviceParams, text: &str, path: Option<&str>) -> anyhow::Result<Vec<Artifact>> {
    let mut program: Program = parse(text).map_err(Error::from)?;
    if inv.spam {
        program.header.spam = Some(true);
    }
    let opts = ExecOptions { dims: inv.dims.map(|d| (d.0, d.1)), mode: inv.mode, snapshots: false };
    let ds = maybe_sample(inv, sweep_dataset(&program, params, &opts)?);
    let stem = path
        .and_then(|p| Path::new(p).file_stem())
        .and_then(|s| s.to_str())
        .unwrap_or("program")
        .to_string();
    Ok(vec![Artifact::csv(&format!("{stem}.csv"), &ds)])
}
