//! CSV layouts shared by every subcommand.
//!
//! Headers are fixed and checked byte for byte on read. Floats are written
//! with 17 significant digits so that a value survives a write/read cycle
//! unchanged.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use biokz::{Method, TrajectorySample};

use crate::error::{CliError, Result};

pub const DENSITY_HEADER: [&str; 8] = [
    "protocol",
    "eps_i",
    "tau_q",
    "L",
    "method",
    "n_ex",
    "broken_share",
    "status",
];
pub const MODES_HEADER: [&str; 7] = ["protocol", "eps_i", "tau_q", "k", "n_ex_k", "method", "status"];
pub const TRAJ_HEADER: [&str; 7] = [
    "t",
    "p_ground",
    "p_excited",
    "re_E_plus",
    "im_E_plus",
    "re_E_minus",
    "im_E_minus",
];

/// 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub const STATUS_OK: &str = "ok";

pub fn error_status(e: &biokz::Error) -> String {
    format!("err:{}", e.kind())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityRow {
    pub protocol: String,
    pub eps_i: f64,
    pub tau_q: f64,
    pub len: usize,
    pub method: Method,
    pub n_ex: f64,
    pub broken_share: f64,
    pub status: String,
}

impl DensityRow {
    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeRow {
    pub protocol: String,
    pub eps_i: f64,
    pub tau_q: f64,
    pub k: f64,
    pub n_ex_k: f64,
    pub method: Method,
    pub status: String,
}

impl ModeRow {
    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

fn parse_method(s: &str) -> Option<Method> {
    match s {
        "biorthogonal" => Some(Method::Biorthogonal),
        "normalized" => Some(Method::Normalized),
        _ => None,
    }
}

pub fn write_density(path: &Path, rows: &[DensityRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(DENSITY_HEADER)?;
    for r in rows {
        w.write_record([
            r.protocol.clone(),
            float(r.eps_i),
            float(r.tau_q),
            r.len.to_string(),
            r.method.name().to_string(),
            float(r.n_ex),
            float(r.broken_share),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_modes(path: &Path, rows: &[ModeRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(MODES_HEADER)?;
    for r in rows {
        w.write_record([
            r.protocol.clone(),
            float(r.eps_i),
            float(r.tau_q),
            float(r.k),
            float(r.n_ex_k),
            r.method.name().to_string(),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory(path: &Path, samples: &[TrajectorySample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRAJ_HEADER)?;
    for s in samples {
        w.write_record([
            float(s.t),
            float(s.p_ground),
            float(s.p_excited),
            float(s.e_plus.re),
            float(s.e_plus.im),
            float(s.e_minus.re),
            float(s.e_minus.im),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plain two-or-more column numeric table with a caller-chosen header.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|&x| float(x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Open `path`, check its header against `expected` and return the records.
fn read_checked(path: &Path, expected: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut records = r.records();
    let header = match records.next() {
        None => return Err(CliError::schema(path, "empty file, expected a header")),
        Some(h) => h.map_err(|e| CliError::schema(path, e.to_string()))?,
    };
    if header.iter().ne(expected.iter().copied()) {
        return Err(CliError::schema(
            path,
            format!(
                "header `{}` does not match `{}`",
                header.iter().collect::<Vec<_>>().join(","),
                expected.join(",")
            ),
        ));
    }
    let rows: Vec<csv::StringRecord> = records
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::schema(path, e.to_string()))?;
    Ok(rows)
}

fn field<T: std::str::FromStr>(path: &Path, row: usize, rec: &csv::StringRecord, col: usize, name: &str) -> Result<T> {
    rec.get(col)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError::schema(path, format!("row {row}: bad `{name}` value")))
}

fn method_field(path: &Path, row: usize, rec: &csv::StringRecord, col: usize) -> Result<Method> {
    rec.get(col)
        .and_then(parse_method)
        .ok_or_else(|| CliError::schema(path, format!("row {row}: bad `method` value")))
}

pub fn read_density(path: &Path) -> Result<Vec<DensityRow>> {
    let records = read_checked(path, &DENSITY_HEADER)?;
    records
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let row = i + 2;
            Ok(DensityRow {
                protocol: rec[0].to_string(),
                eps_i: field(path, row, rec, 1, "eps_i")?,
                tau_q: field(path, row, rec, 2, "tau_q")?,
                len: field(path, row, rec, 3, "L")?,
                method: method_field(path, row, rec, 4)?,
                n_ex: field(path, row, rec, 5, "n_ex")?,
                broken_share: field(path, row, rec, 6, "broken_share")?,
                status: rec[7].to_string(),
            })
        })
        .collect()
}

pub fn read_modes(path: &Path) -> Result<Vec<ModeRow>> {
    let records = read_checked(path, &MODES_HEADER)?;
    records
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let row = i + 2;
            Ok(ModeRow {
                protocol: rec[0].to_string(),
                eps_i: field(path, row, rec, 1, "eps_i")?,
                tau_q: field(path, row, rec, 2, "tau_q")?,
                k: field(path, row, rec, 3, "k")?,
                n_ex_k: field(path, row, rec, 4, "n_ex_k")?,
                method: method_field(path, row, rec, 5)?,
                status: rec[6].to_string(),
            })
        })
        .collect()
}
