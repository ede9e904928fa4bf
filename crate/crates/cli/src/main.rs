//! `qmem`: run interference experiments on the two-cavity simulator and
//! write plot-ready CSV plus JSON reports.

mod commands;
mod manifest;
mod shots;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use qmem::GateMode;

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[command(name = "qmem", version, about = "Beamsplitter interference between two bosonic memories")]
pub struct Cli {
    /// Device config file (`key = value # unit` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub mode: Option<GateMode>,
    /// Truncation per mode, e.g. `6,6`.
    #[arg(long, global = true)]
    pub dims: Option<Dims>,
    /// Sample this many shots per row instead of writing exact values.
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Apply readout contrast to joint-number populations.
    #[arg(long, global = true)]
    pub spam: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
pub enum Command {
    /// Single excitation swapping between the cavities, with a decay fit.
    Rabi {
        /// Coupling in MHz; defaults to the config value.
        #[arg(long)]
        g: Option<f64>,
        #[arg(long, default_value_t = 30.0)]
        t_max: f64,
        #[arg(long, default_value_t = 121)]
        steps: usize,
    },
    /// Two single photons on the beamsplitter.
    Hom {
        /// Defaults to three 50:50 durations.
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 61)]
        steps: usize,
        /// Classical model for distinguishable photons.
        #[arg(long)]
        distinguishable: bool,
    },
    /// Parity swap test between coherent states over amplitude and phase.
    Overlap {
        /// Defaults to √3, or less when the truncation cannot hold the
        /// interfered states.
        #[arg(long)]
        alpha_max: Option<f64>,
        /// Defaults to 7 ideal, 4 physical.
        #[arg(long)]
        alpha_steps: Option<usize>,
        /// Defaults to 25 ideal, 9 physical.
        #[arg(long)]
        phase_steps: Option<usize>,
    },
    /// Cascaded Mach-Zehnder sequence on |1,1>.
    Mz {
        #[arg(long, default_value_t = 20)]
        steps_per_gate: usize,
        /// Drop both differential phase shifts.
        #[arg(long)]
        no_dps: bool,
    },
    /// |2,1> interference and coherent-state splitting.
    Multiphoton {
        /// Defaults to two 50:50 durations.
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        /// Truncation for the coherent-state report; defaults to 20 ideal, 13 physical.
        #[arg(long)]
        coherent_dim: Option<usize>,
    },
    /// Coupling, gate time and infidelity versus drive strength.
    Calibrate {
        #[arg(long, default_value_t = 0.04)]
        xi_min: f64,
        #[arg(long, default_value_t = 0.16)]
        xi_max: f64,
        #[arg(long, default_value_t = 13)]
        xi_steps: usize,
        /// Detuning of drive 1 from the coupler, MHz.
        #[arg(long, default_value_t = 157.0)]
        delta1: f64,
        /// Detuning of drive 2 from the coupler, MHz.
        #[arg(long, default_value_t = 1148.0)]
        delta2: f64,
    },
    /// Execute a program file.
    Run { path: PathBuf },
    /// Re-run the invocation recorded in a manifest.
    Replay { manifest: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rabi { .. } => "rabi",
            Command::Hom { .. } => "hom",
            Command::Overlap { .. } => "overlap",
            Command::Mz { .. } => "mz",
            Command::Multiphoton { .. } => "multiphoton",
            Command::Calibrate { .. } => "calibrate",
            Command::Run { .. } => "run",
            Command::Replay { .. } => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims(pub usize, pub usize);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected A,B, got `{s}`"))?;
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad dimension `{x}`: {e}"));
        Ok(Dims(parse(a)?, parse(b)?))
    }
}

/// Bad user input that clap could not catch.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn classify(e: &qmem::Error) -> u8 {
    use qmem::Error as E;
    if e.is_numerical() {
        return 4;
    }
    match e {
        E::Execution { source, .. } => classify(source),
        E::Config { .. } | E::InvalidParams(_) | E::InvalidCoupling(_) => 3,
        E::Parse(_) | E::EmptyGrid | E::InvalidDimension(_) | E::InvalidSpace(_) | E::OutOfTruncation { .. } => 2,
        _ => 1,
    }
}

/// 2 usage, 3 config, 4 numerical guard, 1 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<qmem::Error>() {
            return classify(e);
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
