//! Simulation of programmable interference between two bosonic cavity
//! memories joined by a drive-engineered beamsplitter.
//!
//! Frequencies are cyclic MHz and times are µs throughout; two-mode states
//! are ordered Alice-major (`index = n_a * dim_b + n_b`).

pub mod config;
pub mod device;
pub mod error;
pub mod estimation;
pub mod evolution;
pub mod fock;
pub mod interferometry;
pub mod measurement;
pub mod program;
mod sparse;
pub mod spectral;

pub use device::DeviceParams;
pub use error::{Error, Result};
pub use fock::{ModeSpace, Operator, QuantumState, C64};
pub use interferometry::{GateMode, GateRecord};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
