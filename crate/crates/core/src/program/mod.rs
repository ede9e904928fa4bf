//! Straight-line interferometer programs.
//!
//! ```text
//! dims 6 6
//! mode physical
//! sweep t from 0 to 7.35 steps 41
//! prep fock 1 1
//! bs t=$t
//! measure joint
//! ```
//!
//! One instruction per line, `key=value` arguments, `#` comments. Angles
//! accept `pi` literals such as `0.25pi`. A single `sweep` clause binds a
//! `$name` placeholder to an inclusive grid.

mod dataset;
mod exec;
mod parse;

use std::fmt;

pub use dataset::{format_real, sweep_dataset, Dataset};
pub use exec::{execute, execute_with, sweep_grid, ExecOptions, ExecutionTrace, MeasurementRecord, DEFAULT_DIMS};
pub use parse::{parse, ParseError, ParseErrorKind};

use crate::interferometry::GateMode;

/// Numeric argument, possibly the swept placeholder.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Placeholder(String),
}

impl Value {
    pub fn num(v: f64) -> Self {
        Value::Num(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{v}"),
            Value::Placeholder(name) => write!(f, "${name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prep {
    Fock { n: usize, m: usize },
    Coherent { ra: Value, rb: Value, phase_a: Value, phase_b: Value },
    State21,
}

/// How a beamsplitter is specified: mixing angle or drive duration.
#[derive(Debug, Clone, PartialEq)]
pub enum BsArg {
    Theta(Value),
    Time(Value),
}

/// Differential phase as a per-photon phase, a phase between the
/// two-photon branch and vacuum, or an ancilla duration.
#[derive(Debug, Clone, PartialEq)]
pub enum DpsArg {
    Phi(Value),
    Branch(Value),
    Time(Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Joint,
    Parity(usize),
    Overlap,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Prepare(Prep),
    Bs { arg: BsArg, phi: Value, mode: Option<GateMode> },
    Dps { arg: DpsArg, mode: Option<GateMode> },
    Displace { cavity: usize, alpha: Value, phase: Value },
    Wait { t: Value },
    Measure(MeasureKind),
    Set { key: String, value: Value },
}

impl Instruction {
    pub fn is_measurement(&self) -> bool {
        matches!(self, Instruction::Measure(_))
    }
}

fn cavity_name(c: usize) -> &'static str {
    if c == 0 {
        "a"
    } else {
        "b"
    }
}

fn mode_suffix(mode: &Option<GateMode>) -> String {
    mode.map(|m| format!(" mode={}", m.as_str())).unwrap_or_default()
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Prepare(Prep::Fock { n, m }) => write!(f, "prep fock {n} {m}"),
            Instruction::Prepare(Prep::Coherent { ra, rb, phase_a, phase_b }) => {
                write!(f, "prep coherent {ra} {rb} phase_a={phase_a} phase_b={phase_b}")
            }
            Instruction::Prepare(Prep::State21) => write!(f, "prep state21"),
            Instruction::Bs { arg, phi, mode } => {
                let a = match arg {
                    BsArg::Theta(v) => format!("theta={v}"),
                    BsArg::Time(v) => format!("t={v}"),
                };
                write!(f, "bs {a} phi={phi}{}", mode_suffix(mode))
            }
            Instruction::Dps { arg, mode } => {
                let a = match arg {
                    DpsArg::Phi(v) => format!("phi={v}"),
                    DpsArg::Branch(v) => format!("branch={v}"),
                    DpsArg::Time(v) => format!("t={v}"),
                };
                write!(f, "dps {a}{}", mode_suffix(mode))
            }
            Instruction::Displace { cavity, alpha, phase } => {
                write!(f, "displace cavity={} alpha={alpha} phase={phase}", cavity_name(*cavity))
            }
            Instruction::Wait { t } => write!(f, "wait t={t}"),
            Instruction::Measure(MeasureKind::Joint) => write!(f, "measure joint"),
            Instruction::Measure(MeasureKind::Parity(c)) => write!(f, "measure parity {}", cavity_name(*c)),
            Instruction::Measure(MeasureKind::Overlap) => write!(f, "measure overlap"),
            Instruction::Set { key, value } => write!(f, "set {key}={value}"),
        }
    }
}

/// Instruction with its source location. Locations are ignored by `==`.
#[derive(Debug, Clone)]
pub struct Step {
    pub instruction: Instruction,
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Step {
    fn eq(&self, other: &Self) -> bool {
        self.instruction == other.instruction
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    pub dims: Option<(usize, usize)>,
    pub config: Option<String>,
    pub mode: Option<GateMode>,
    pub spam: Option<bool>,
    pub postselect: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Program {
    pub header: Header,
    pub steps: Vec<Step>,
    pub sweep: Option<Sweep>,
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

impl Program {
    pub fn instructions(&self) -> impl Iterator<Item = &Instruction> {
        self.steps.iter().map(|s| &s.instruction)
    }

    pub fn mode(&self) -> GateMode {
        self.header.mode.unwrap_or_default()
    }

    pub fn spam(&self) -> bool {
        self.header.spam.unwrap_or(false)
    }

    pub fn postselect(&self) -> bool {
        self.header.postselect.unwrap_or(true)
    }

    /// Normalized source text; parses back to an equal program.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        let h = &self.header;
        if let Some((a, b)) = h.dims {
            out.push_str(&format!("dims {a} {b}\n"));
        }
        if let Some(c) = &h.config {
            out.push_str(&format!("config {c}\n"));
        }
        if let Some(m) = h.mode {
            out.push_str(&format!("mode {}\n", m.as_str()));
        }
        if let Some(s) = h.spam {
            out.push_str(&format!("spam {}\n", on_off(s)));
        }
        if let Some(p) = h.postselect {
            out.push_str(&format!("postselect {}\n", on_off(p)));
        }
        if let Some(s) = &self.sweep {
            out.push_str(&format!("sweep {} from {} to {} steps {}\n", s.name, s.start, s.stop, s.steps));
        }
        for step in &self.steps {
            out.push_str(&step.instruction.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}
