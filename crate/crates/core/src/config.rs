//! Flat `key = value # unit` device configuration files.
//!
//! Every key is optional; missing keys keep their [`DeviceParams::default`]
//! value. A trailing comment, when present, must start with the key's unit.
//! `t2_a`/`t2_b` may be given instead of `tphi_a`/`tphi_b`.

use std::collections::HashMap;
use std::path::Path;

use crate::device::{tphi_from_t2, DeviceParams};
use crate::error::{Error, Result};
use crate::measurement::check_selective_injective;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    MHz,
    Us,
    One,
}

impl Unit {
    fn accepts(self, token: &str) -> bool {
        match self {
            Unit::MHz => token == "MHz",
            Unit::Us => token == "us" || token == "µs",
            Unit::One => token == "1" || token == "dimensionless",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Unit::MHz => "MHz",
            Unit::Us => "us",
            Unit::One => "1",
        }
    }
}

type Field = fn(&mut DeviceParams) -> &mut f64;

const KEYS: &[(&str, Unit, Field, &str)] = &[
    ("omega_a", Unit::MHz, |p| &mut p.omega_a, "Alice frequency"),
    ("omega_b", Unit::MHz, |p| &mut p.omega_b, "Bob frequency"),
    ("omega_ge", Unit::MHz, |p| &mut p.omega_ge, "coupler transmon g-e frequency"),
    ("chi_ac", Unit::MHz, |p| &mut p.chi_ac, "dispersive shift coupler-Alice"),
    ("chi_bc", Unit::MHz, |p| &mut p.chi_bc, "dispersive shift coupler-Bob"),
    ("chi_1", Unit::MHz, |p| &mut p.chi_1, "dispersive shift phase ancilla-Alice"),
    ("chi_aa", Unit::MHz, |p| &mut p.chi_aa, "Alice self-Kerr with drives on"),
    ("chi_bb", Unit::MHz, |p| &mut p.chi_bb, "Bob self-Kerr with drives on"),
    ("chi_ab", Unit::MHz, |p| &mut p.chi_ab, "Alice-Bob cross-Kerr (upper bound)"),
    ("bare_chi_aa", Unit::MHz, |p| &mut p.bare_chi_aa, "Alice self-Kerr, drives off"),
    ("bare_chi_bb", Unit::MHz, |p| &mut p.bare_chi_bb, "Bob self-Kerr, drives off"),
    ("alpha", Unit::MHz, |p| &mut p.alpha, "coupler anharmonicity"),
    ("kappa_tilde", Unit::MHz, |p| &mut p.kappa_tilde, "coupler decay rate"),
    ("t1_a", Unit::Us, |p| &mut p.t1_a, "Alice energy relaxation"),
    ("t1_b", Unit::Us, |p| &mut p.t1_b, "Bob energy relaxation"),
    ("tphi_a", Unit::Us, |p| &mut p.tphi_a, "Alice pure dephasing"),
    ("tphi_b", Unit::Us, |p| &mut p.tphi_b, "Bob pure dephasing"),
    ("readout_scale", Unit::One, |p| &mut p.readout_scale, "joint-number readout contrast"),
    ("parity_contrast", Unit::One, |p| &mut p.parity_contrast, "parity measurement contrast"),
    ("p_exc", Unit::One, |p| &mut p.p_exc, "coupler excitation per beamsplitter"),
    ("g", Unit::MHz, |p| &mut p.g, "operating beamsplitter coupling"),
    ("ring_time", Unit::Us, |p| &mut p.ring_time, "drive ring-up/down time"),
    ("readout_time", Unit::Us, |p| &mut p.readout_time, "selective pi-pulse length"),
    ("drive_dephasing_factor", Unit::One, |p| &mut p.drive_dephasing_factor, "dephasing multiplier, drives on"),
    ("leakage_tolerance", Unit::One, |p| &mut p.leakage_tolerance, "truncation guard"),
    ("xi_ratio", Unit::One, |p| &mut p.xi_ratio, "|xi1|/|xi2| drive split"),
];

const T2_KEYS: &[(&str, &str)] = &[("t2_a", "tphi_a"), ("t2_b", "tphi_b")];

/// Names of every numeric device parameter, in file order.
pub fn parameter_names() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|k| k.0)
}

/// Mutable access to a parameter by config key.
pub fn parameter_mut<'a>(params: &'a mut DeviceParams, key: &str) -> Option<&'a mut f64> {
    KEYS.iter().find(|k| k.0 == key).map(|k| (k.2)(params))
}

pub fn parse_config(text: &str) -> Result<DeviceParams> {
    let mut params = DeviceParams::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut t2: Vec<(&str, f64, usize)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| Error::Config { line, message };
        let (body, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(raw[pos + 1..].trim())),
            None => (raw, None),
        };
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, found `{body}`")))?;
        let key = key.trim();
        let value = value.trim();
        let number: f64 = value
            .parse()
            .map_err(|_| err(format!("`{value}` is not a number")))?;
        if !number.is_finite() {
            return Err(err(format!("`{key}` must be finite")));
        }
        if let Some(prev) = seen.insert(key.to_string(), line) {
            return Err(err(format!("duplicate key `{key}` (first set on line {prev})")));
        }

        let unit = if let Some(&(name, _)) = T2_KEYS.iter().find(|(k, _)| *k == key) {
            t2.push((name, number, line));
            Unit::Us
        } else {
            let (_, unit, field, _) = KEYS
                .iter()
                .find(|k| k.0 == key)
                .ok_or_else(|| err(format!("unknown key `{key}`")))?;
            *field(&mut params) = number;
            *unit
        };
        if let Some(comment) = comment {
            let token = comment.split(|c: char| c.is_whitespace() || c == ',').next().unwrap_or("");
            if !token.is_empty() && !unit.accepts(token) {
                return Err(err(format!("`{key}` expects unit {}, found `{token}`", unit.label())));
            }
        }
    }

    for (name, t2_value, line) in t2 {
        let (t1, tphi_key) = if name == "t2_a" { (params.t1_a, "tphi_a") } else { (params.t1_b, "tphi_b") };
        if seen.contains_key(tphi_key) {
            return Err(Error::Config { line, message: format!("`{name}` and `{tphi_key}` are mutually exclusive") });
        }
        let tphi = tphi_from_t2(t1, t2_value).map_err(|e| Error::Config { line, message: e.to_string() })?;
        if name == "t2_a" {
            params.tphi_a = tphi;
        } else {
            params.tphi_b = tphi;
        }
    }

    params.validate().map_err(|e| Error::Config { line: 0, message: e.to_string() })?;
    check_selective_injective(&params, 10).map_err(|e| Error::Config { line: 0, message: e.to_string() })?;
    Ok(params)
}

pub fn load_config(path: &Path) -> Result<DeviceParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}

/// Render every parameter in the loader's format.
pub fn to_config_string(params: &DeviceParams) -> String {
    let mut p = params.clone();
    let mut out = String::new();
    for (key, unit, field, note) in KEYS {
        out.push_str(&format!("{key} = {} # {}, {note}\n", field(&mut p), unit.label()));
    }
    out
}
