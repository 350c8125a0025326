#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaussmap"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

pub fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

pub const SPHERE: &str = r#"{"surface": {"family": "geodesic_sphere", "rho": 0.5, "n": 2}, "grid": {"nodes": 32}}"#;
pub const TORUS: &str = r#"{"surface": {"family": "clifford", "n": 2, "r": 0.6}, "grid": {"nodes": 32}}"#;
