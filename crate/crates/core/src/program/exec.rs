use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BsArg, DpsArg, Instruction, MeasureKind, Prep, Program, Value};
use crate::config::parameter_mut;
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::fock::{coherent_state_with_tolerance, fock_state, partial_trace, ModeSpace, QuantumState, C64};
use crate::interferometry::{beamsplitter, displace, dps, prepare_21, wait, BeamsplitterSpec, GateMode, GateRecord};
use crate::measurement::{joint_number_probs, overlap_via_parity, parity_expectation, postselect};

pub const DEFAULT_DIMS: (usize, usize) = (6, 6);

/// Overrides applied on top of a program's header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExecOptions {
    pub dims: Option<(usize, usize)>,
    pub mode: Option<GateMode>,
    /// Keep the state after every instruction.
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    /// Instruction index.
    pub index: usize,
    pub line: usize,
    pub label: String,
    /// Elapsed program time when the readout happened.
    pub time: f64,
    pub values: Vec<(String, f64)>,
}

impl MeasurementRecord {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace {
    pub sweep_value: Option<f64>,
    pub measurements: Vec<MeasurementRecord>,
    pub gates: Vec<GateRecord>,
    pub duration: f64,
    pub final_state: QuantumState,
    pub snapshots: Vec<QuantumState>,
}

/// Inclusive grid with exactly `steps` points.
pub fn sweep_grid(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|k| if k == n - 1 { stop } else { start + (stop - start) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

pub fn execute(program: &Program, params: &DeviceParams) -> Result<Vec<ExecutionTrace>> {
    execute_with(program, params, &ExecOptions::default())
}

/// One trace per sweep point (one trace without a sweep), in grid order.
pub fn execute_with(program: &Program, params: &DeviceParams, opts: &ExecOptions) -> Result<Vec<ExecutionTrace>> {
    match &program.sweep {
        None => Ok(vec![run(program, params, opts, None)?]),
        Some(s) => {
            let grid = sweep_grid(s.start, s.stop, s.steps);
            if grid.is_empty() {
                return Err(Error::EmptyGrid);
            }
            grid.par_iter().map(|&x| run(program, params, opts, Some((s.name.as_str(), x)))).collect()
        }
    }
}

fn resolve(v: &Value, binding: Option<(&str, f64)>) -> f64 {
    match v {
        Value::Num(x) => *x,
        Value::Placeholder(name) => match binding {
            Some((n, x)) if n == name => x,
            // the parser rejects unbound placeholders
            _ => f64::NAN,
        },
    }
}

struct Runner<'a> {
    params: DeviceParams,
    space: ModeSpace,
    mode: GateMode,
    spam: bool,
    postselect: bool,
    binding: Option<(&'a str, f64)>,
    state: QuantumState,
    gates: Vec<GateRecord>,
    measurements: Vec<MeasurementRecord>,
    time: f64,
}

impl Runner<'_> {
    fn val(&self, v: &Value) -> f64 {
        resolve(v, self.binding)
    }

    fn gate(&mut self, out: (QuantumState, GateRecord)) {
        self.state = out.0;
        self.time += out.1.duration;
        self.gates.push(out.1);
    }

    fn step(&mut self, index: usize, line: usize, ins: &Instruction, readout_follows: bool) -> Result<()> {
        match ins {
            Instruction::Prepare(p) => {
                self.state = match p {
                    Prep::Fock { n, m } => fock_state(&self.space, &[*n, *m])?,
                    Prep::Coherent { ra, rb, phase_a, phase_b } => {
                        let tol = self.params.leakage_tolerance;
                        let (da, db) = (self.space.dims()[0], self.space.dims()[1]);
                        let a = coherent_state_with_tolerance(da, C64::from_polar(self.val(ra), self.val(phase_a)), tol)?;
                        let b = coherent_state_with_tolerance(db, C64::from_polar(self.val(rb), self.val(phase_b)), tol)?;
                        a.product(&b)?
                    }
                    Prep::State21 => {
                        let prep = prepare_21(&self.space, &self.params, self.mode)?;
                        self.time += prep.record.duration;
                        self.gates.push(prep.record);
                        prep.state
                    }
                };
            }
            Instruction::Bs { arg, phi, mode } => {
                let theta = match arg {
                    BsArg::Theta(v) => self.val(v),
                    BsArg::Time(v) => TAU * self.params.g * self.val(v),
                };
                let spec = BeamsplitterSpec::new(theta, self.val(phi), mode.unwrap_or(self.mode));
                let out = beamsplitter(&self.state, &spec, &self.params)?;
                self.gate(out);
            }
            Instruction::Dps { arg, mode } => {
                let phi = match arg {
                    DpsArg::Phi(v) => self.val(v),
                    DpsArg::Branch(v) => self.val(v) / 2.0,
                    DpsArg::Time(v) => self.params.dps_rate() * self.val(v),
                };
                let out = dps(&self.state, phi, &self.params, mode.unwrap_or(self.mode))?;
                self.gate(out);
            }
            Instruction::Displace { cavity, alpha, phase } => {
                let a = C64::from_polar(self.val(alpha), self.val(phase));
                self.state = displace(&self.state, *cavity, a, self.params.leakage_tolerance)?;
            }
            Instruction::Wait { t } => {
                let out = wait(&self.state, self.val(t), &self.params, self.mode)?;
                self.gate(out);
            }
            Instruction::Measure(kind) => {
                let (label, values) = self.measure(*kind)?;
                self.measurements.push(MeasurementRecord { index, line, label, time: self.time, values });
                if readout_follows && self.mode == GateMode::Physical {
                    let out = wait(&self.state, self.params.readout_time, &self.params, self.mode)?;
                    let mut rec = out.1.clone();
                    rec.name = "readout".into();
                    self.gate((out.0, rec));
                }
            }
            Instruction::Set { key, value } => {
                let v = self.val(value);
                let slot = parameter_mut(&mut self.params, key)
                    .ok_or_else(|| Error::InvalidParams(format!("unknown device parameter `{key}`")))?;
                *slot = v;
                self.params.validate()?;
            }
        }
        Ok(())
    }

    fn measure(&self, kind: MeasureKind) -> Result<(String, Vec<(String, f64)>)> {
        Ok(match kind {
            MeasureKind::Joint => {
                let mut dist = joint_number_probs(&self.state, &self.params, self.spam)?;
                dist = if self.postselect {
                    postselect(&dist, &self.gates)?
                } else {
                    dist.apply_excitation_loss(&self.gates)
                };
                let (da, db) = dist.dims();
                let mut values = Vec::with_capacity(da * db);
                for n in 0..da {
                    for m in 0..db {
                        values.push((format!("P{n}_{m}"), dist.get(n, m)));
                    }
                }
                ("joint".into(), values)
            }
            MeasureKind::Parity(c) => {
                let name = if c == 0 { "a" } else { "b" };
                let raw = parity_expectation(&self.state, c, &self.params, false)?;
                (
                    format!("parity {name}"),
                    vec![
                        (format!("parity_{name}"), raw),
                        (format!("parity_{name}_scaled"), raw * self.params.parity_contrast),
                    ],
                )
            }
            MeasureKind::Overlap => {
                let rho = self.state.to_density();
                let a = partial_trace(&rho, 0)?;
                let b = partial_trace(&rho, 1)?;
                let est = overlap_via_parity(&a, &b, &self.params, self.mode)?;
                (
                    "overlap".into(),
                    vec![
                        ("overlap".into(), est.value),
                        ("overlap_scaled".into(), est.scaled),
                        ("overlap_ideal".into(), est.ideal_value),
                    ],
                )
            }
        })
    }
}

fn run(program: &Program, params: &DeviceParams, opts: &ExecOptions, binding: Option<(&str, f64)>) -> Result<ExecutionTrace> {
    let (da, db) = opts.dims.or(program.header.dims).unwrap_or(DEFAULT_DIMS);
    let space = ModeSpace::two_mode(da, db)?;
    let mut runner = Runner {
        params: params.clone(),
        state: fock_state(&space, &[0, 0])?,
        space,
        mode: opts.mode.unwrap_or(program.mode()),
        spam: program.spam(),
        postselect: program.postselect(),
        binding,
        gates: Vec::new(),
        measurements: Vec::new(),
        time: 0.0,
    };
    let steps = &program.steps;
    let last_gate = steps.iter().rposition(|s| !s.instruction.is_measurement());
    let mut snapshots = Vec::new();
    for (i, s) in steps.iter().enumerate() {
        let readout_follows = last_gate.is_some_and(|g| g > i);
        let next_is_measure = steps.get(i + 1).is_some_and(|n| n.instruction.is_measurement());
        // consecutive readouts share one readout window
        let charge = readout_follows && !next_is_measure;
        runner
            .step(i, s.line, &s.instruction, charge)
            .map_err(|e| Error::Execution { index: i, line: s.line, source: Box::new(e) })?;
        if opts.snapshots {
            snapshots.push(runner.state.clone());
        }
    }
    Ok(ExecutionTrace {
        sweep_value: binding.map(|b| b.1),
        measurements: runner.measurements,
        gates: runner.gates,
        duration: runner.time,
        final_state: runner.state,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse;

    fn run_src(src: &str) -> Vec<ExecutionTrace> {
        execute(&parse(src).unwrap(), &DeviceParams::default()).unwrap()
    }

    #[test]
    fn swap_program() {
        let t = run_src("prep fock 1 0\nbs theta=0.5pi\nmeasure joint\n");
        assert!((t[0].measurements[0].value("P0_1").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hom_program() {
        let t = run_src("prep fock 1 1\nbs theta=0.25pi\nmeasure joint\n");
        let m = &t[0].measurements[0];
        assert!(m.value("P1_1").unwrap() < 1e-12);
        assert!((m.value("P2_0").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grid_is_inclusive() {
        assert_eq!(sweep_grid(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(sweep_grid(2.0, 9.0, 1), vec![2.0]);
        assert!(sweep_grid(0.0, 1.0, 0).is_empty());
        let p = parse("sweep x from 0 to 1 steps 0\nwait t=$x\n").unwrap();
        assert_eq!(execute(&p, &DeviceParams::default()), Err(Error::EmptyGrid));
    }

    #[test]
    fn errors_carry_instruction_index() {
        let p = parse("dims 3 3\nprep fock 1 0\ndisplace cavity=a alpha=2\n").unwrap();
        match execute(&p, &DeviceParams::default()) {
            Err(Error::Execution { index, line, source }) => {
                assert_eq!((index, line), (1, 3));
                assert!(matches!(*source, Error::TruncationTooSmall { .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mid_program_readout_costs_time() {
        let src = "mode physical\ndims 3 3\nprep fock 1 0\nmeasure joint\nmeasure parity a\nwait t=1\nmeasure joint\n";
        let t = run_src(src);
        let p = DeviceParams::default();
        assert!((t[0].duration - (p.readout_time + 1.0)).abs() < 1e-12);
        assert_eq!(t[0].measurements.len(), 3);
    }

    #[test]
    fn set_changes_coupling() {
        let t = run_src("set g=0.0625\nprep fock 1 0\nbs t=2\nmeasure joint\n");
        // θ = 2π · 0.0625 · 2 = π/4
        assert!((t[0].measurements[0].value("P1_0").unwrap() - 0.5).abs() < 1e-12);
    }
}
