//! Reference external worker: answers distance requests with either plain
//! ℓ2 between waveforms or any builtin waveform distance.
//!
//! ```text
//! pitchgrad trials --extern-cmd 'pitchgrad-worker --metric spectrogram'
//! ```

use std::collections::HashMap;
use std::io::{self, BufRead, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use pitchgrad::distance::{builtin, Distance, DistanceSpec};
use pitchgrad::extern_protocol::{Banner, ExternRequest, ExternResponse};
use pitchgrad::signal::BenchConfig;

#[derive(Debug, Parser)]
#[command(name = "pitchgrad-worker", version, about = "Reference worker for pitchgrad's external distance protocol")]
struct Args {
    /// `l2`, or the name of a builtin waveform distance.
    #[arg(long, default_value = "l2")]
    metric: String,
    /// Name reported in the banner [default: pitchgrad-worker/<metric>].
    #[arg(long)]
    name: Option<String>,
}

enum Metric {
    L2,
    Builtin {
        spec: DistanceSpec,
        /// Compiled distances keyed by (sample rate bits, length).
        cache: HashMap<(u64, usize), Distance>,
    },
}

impl Metric {
    fn parse(name: &str) -> Result<Self, String> {
        if name == "l2" {
            return Ok(Metric::L2);
        }
        let spec = builtin(name).map_err(|e| e.to_string())?;
        let probe = Distance::new(spec.clone(), &BenchConfig::default()).map_err(|e| e.to_string())?;
        if !probe.is_waveform_based() {
            return Err(format!("`{name}` does not compare waveforms"));
        }
        Ok(Metric::Builtin { spec, cache: HashMap::new() })
    }

    fn distance(&mut self, req: &ExternRequest) -> Result<f64, String> {
        if req.target.len() != req.prediction.len() {
            return Err(format!(
                "waveform lengths differ: {} vs {}",
                req.target.len(),
                req.prediction.len()
            ));
        }
        match self {
            Metric::L2 => Ok(req
                .target
                .iter()
                .zip(&req.prediction)
                .map(|(t, p)| (t - p) * (t - p))
                .sum::<f64>()
                .sqrt()),
            Metric::Builtin { spec, cache } => {
                let key = (req.sample_rate_hz.to_bits(), req.target.len());
                if !cache.contains_key(&key) {
                    let cfg = BenchConfig {
                        sample_rate_hz: req.sample_rate_hz,
                        n_samples: req.target.len(),
                        ..BenchConfig::default()
                    };
                    let d = Distance::new(spec.clone(), &cfg).map_err(|e| e.to_string())?;
                    cache.insert(key, d);
                }
                cache[&key].evaluate_real(&req.target, &req.prediction).map_err(|e| e.to_string())
            }
        }
    }
}

fn respond(req_line: &str, metric: &mut Metric) -> ExternResponse {
    match serde_json::from_str::<ExternRequest>(req_line) {
        Ok(req) => match metric.distance(&req) {
            Ok(d) => ExternResponse { id: req.id, distance: Some(d), error: None },
            Err(e) => ExternResponse { id: req.id, distance: None, error: Some(e) },
        },
        Err(e) => {
            let id = serde_json::from_str::<Value>(req_line)
                .ok()
                .and_then(|v| v.get("id").and_then(Value::as_u64))
                .unwrap_or(0);
            ExternResponse { id, distance: None, error: Some(format!("malformed request: {e}")) }
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut metric = match Metric::parse(&args.metric) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let name = args.name.unwrap_or_else(|| format!("pitchgrad-worker/{}", args.metric));
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = (|| -> io::Result<()> {
        serde_json::to_writer(&mut out, &Banner::current(name))?;
        writeln!(out)?;
        out.flush()?;
        for line in io::stdin().lock().lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            serde_json::to_writer(&mut out, &respond(&line, &mut metric))?;
            writeln!(out)?;
            out.flush()?;
        }
        Ok(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
