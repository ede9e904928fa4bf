use std::fmt::Write as _;

use super::exec::{execute_with, ExecOptions, ExecutionTrace};
use super::Program;
use crate::device::DeviceParams;
use crate::error::{Error, Result};

/// Rows of numbers under named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// C `%.12e`: 12 fractional digits and an exponent of at least two digits.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

impl Dataset {
    pub fn new(columns: Vec<String>) -> Self {
        Dataset { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&format_real(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::InvalidDataset("empty CSV".into()))?;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut ds = Dataset::new(columns);
        for (i, line) in lines.enumerate() {
            let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| Error::InvalidDataset(format!("row {}: {e}", i + 1)))?;
            if row.len() != ds.columns.len() {
                return Err(Error::InvalidDataset(format!(
                    "row {} has {} fields, header has {}",
                    i + 1,
                    row.len(),
                    ds.columns.len()
                )));
            }
            ds.rows.push(row);
        }
        Ok(ds)
    }
}

fn column_names(program: &Program, trace: &ExecutionTrace) -> Vec<String> {
    let mut cols = Vec::new();
    if let Some(s) = &program.sweep {
        cols.push(s.name.clone());
    }
    cols.push("duration".to_string());
    let multi = trace.measurements.len() > 1;
    for (k, m) in trace.measurements.iter().enumerate() {
        let prefix = if multi {
            let mut p = String::new();
            let _ = write!(p, "m{}_", k + 1);
            p
        } else {
            String::new()
        };
        cols.push(format!("{prefix}time"));
        for (name, _) in &m.values {
            cols.push(format!("{prefix}{name}"));
        }
    }
    cols
}

/// Rows in grid order: the swept value, total duration, then every
/// measurement's time and values. Several measurements get `m1_`, `m2_`,
/// ... prefixes.
pub fn sweep_dataset(program: &Program, params: &DeviceParams, opts: &ExecOptions) -> Result<Dataset> {
    let traces = execute_with(program, params, opts)?;
    let mut ds = Dataset::new(column_names(program, &traces[0]));
    for t in &traces {
        let mut row = Vec::with_capacity(ds.columns.len());
        if let Some(x) = t.sweep_value {
            row.push(x);
        }
        row.push(t.duration);
        for m in &t.measurements {
            row.push(m.time);
            row.extend(m.values.iter().map(|v| v.1));
        }
        ds.push(row);
    }
    Ok(ds)
}
