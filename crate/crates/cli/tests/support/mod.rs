//! Helpers for driving the built binaries.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const PITCHGRAD: &str = env!("CARGO_BIN_EXE_pitchgrad");
pub const WORKER: &str = env!("CARGO_BIN_EXE_pitchgrad-worker");

/// Run `pitchgrad` with a pinned timestamp so manifests are reproducible.
pub fn pitchgrad(args: &[&str]) -> Output {
    Command::new(PITCHGRAD)
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env("RUST_LOG", "warn")
        .output()
        .expect("run pitchgrad")
}

pub fn ok(args: &[&str]) -> Output {
    let out = pitchgrad(args);
    assert!(
        out.status.success(),
        "pitchgrad {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

pub fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref())
        .unwrap_or_else(|e| panic!("read {}: {e}", path.as_ref().display()))
}

pub fn json(path: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&read(path)).expect("valid JSON")
}

pub fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/schema").join(name);
    jsonschema::validator_for(&json(path)).expect("schema compiles")
}

pub fn assert_valid(validator: &jsonschema::Validator, value: &serde_json::Value) {
    let errors: Vec<String> = validator.iter_errors(value).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

/// Every file of a run directory, sorted by name.
pub fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("read run dir")
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

/// Shell command running the reference worker.
pub fn worker_cmd(metric: &str) -> String {
    format!("'{WORKER}' --metric {metric}")
}
