//! Output directories and the run manifest.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Serialize;
use serde_json::Value;

use pitchgrad::distance::DistanceSpec;
use pitchgrad::signal::BenchConfig;

use crate::failure::Failure;

pub const MANIFEST: &str = "manifest.json";

/// Run time, or `SOURCE_DATE_EPOCH` when set so reruns can be byte-identical.
pub fn run_time() -> DateTime<Utc> {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now)
}

/// Open a run directory: the given one, or `./out/<UTC timestamp>`.
pub struct RunDir {
    pub path: PathBuf,
    pub time: DateTime<Utc>,
    outputs: Vec<String>,
}

impl RunDir {
    pub fn create(out: Option<&Path>) -> Result<Self, Failure> {
        let time = run_time();
        let path = match out {
            Some(p) => p.to_path_buf(),
            None => Path::new("out").join(time.format("%Y%m%dT%H%M%SZ").to_string()),
        };
        fs::create_dir_all(&path)
            .map_err(|e| Failure::Other(format!("cannot create {}: {e}", path.display())))?;
        Ok(Self { path, time, outputs: Vec::new() })
    }

    /// Write one output file through `body` and remember it for the manifest.
    pub fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
    ) -> Result<(), Failure> {
        let path = self.path.join(name);
        let file = fs::File::create(&path)
            .map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush()?;
        log::info!("wrote {}", path.display());
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }

    /// Close the run with its manifest.
    pub fn finish(
        mut self,
        command: &str,
        config: &BenchConfig,
        specs: &[DistanceSpec],
        options: Value,
    ) -> Result<PathBuf, Failure> {
        let manifest = Manifest {
            tool: "pitchgrad",
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            timestamp: self.time.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            specs: specs
                .iter()
                .map(|s| SpecEntry { name: &s.name, label: &s.label, description: s.describe() })
                .collect(),
            options,
            outputs: self.outputs.clone(),
        };
        self.write_json(MANIFEST, &manifest)?;
        Ok(self.path)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    tool_version: &'static str,
    command: &'a str,
    timestamp: String,
    config: &'a BenchConfig,
    specs: Vec<SpecEntry<'a>>,
    options: Value,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct SpecEntry<'a> {
    name: &'a str,
    label: &'a str,
    description: String,
}

/// Print to stdout; a reader that went away (`| head`) is not an error.
pub fn print(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
