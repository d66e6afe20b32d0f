//! CSV and JSON artifacts.
//!
//! Grid functions are written as `x,u` with one row per node and every number
//! in 17-significant-digit scientific notation; time slabs as `t,x,u`.
//! Files are written to a sibling temporary file and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hjtorus_core::{GridFunction, TimeSlab};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Formats with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn grid_csv(u: &GridFunction) -> String {
    let mut s = String::from("x,u\n");
    for (j, v) in u.values().iter().enumerate() {
        let _ = writeln!(s, "{},{}", fmt_num(u.x(j)), fmt_num(*v));
    }
    s
}

pub fn slab_csv(slab: &TimeSlab) -> String {
    let mut s = String::from("t,x,u\n");
    for (t, u) in slab.times().iter().zip(slab.values()) {
        for (j, v) in u.values().iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", fmt_num(*t), fmt_num(u.x(j)), fmt_num(*v));
        }
    }
    s
}

/// Parses an `x,u` CSV back into a grid function. The `x` column must match
/// the uniform grid of the row count.
pub fn parse_grid_csv(text: &str) -> std::result::Result<GridFunction, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next().map(str::trim) {
        Some("x,u") => {}
        other => return Err(format!("expected header \"x,u\", found {other:?}")),
    }
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for (row, line) in lines.enumerate() {
        let mut cols = line.split(',');
        let (Some(x), Some(u), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(format!("row {row}: expected two columns"));
        };
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("row {row}: {e}"));
        xs.push(parse(x)?);
        us.push(parse(u)?);
    }
    let n = us.len();
    let u = GridFunction::new(us).map_err(|e| e.to_string())?;
    for (j, x) in xs.iter().enumerate() {
        if (x - j as f64 / n as f64).abs() > 1e-9 {
            return Err(format!("row {j}: x = {x} is not the grid node {}", j as f64 / n as f64));
        }
    }
    Ok(u)
}

pub fn read_grid_csv(path: &Path) -> Result<GridFunction> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_grid_csv(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
