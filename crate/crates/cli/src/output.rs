//! Output files. Floats are written with Rust's shortest round-trip
//! formatting (serde_json does the same), so re-reading a file reproduces
//! the in-memory values exactly and equal runs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Points on the Wulff and Frank boundaries and σ samples.
pub const BOUNDARY_POINTS: usize = 1024;

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("cannot create output directory `{}`: {e}", dir.display())))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Input(format!("cannot write `{}`: {e}", path.display())))
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("output values serialize");
    text.push('\n');
    write(dir, name, &text)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    write(dir, name, text)
}

pub fn fmt(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        "nan".to_string()
    }
}

pub fn points_csv(points: &[[f64; 2]]) -> String {
    let mut out = String::from("x,y\n");
    for p in points {
        let _ = writeln!(out, "{},{}", fmt(p[0]), fmt(p[1]));
    }
    out
}

pub fn sigma_csv(samples: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("nu,sigma,stiffness\n");
    for &(nu, s, g) in samples {
        let _ = writeln!(out, "{},{},{}", fmt(nu), fmt(s), fmt(g));
    }
    out
}
