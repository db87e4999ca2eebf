//! Client side of the external distance protocol.
//!
//! A worker is any process that speaks newline-delimited JSON on its
//! standard streams. Its first output line is a banner
//!
//! ```json
//! {"protocol":"pitchgrad-extern","version":1,"name":"..."}
//! ```
//!
//! after which it answers every request line
//! `{"id":N,"sample_rate_hz":R,"target":[..],"prediction":[..]}` with exactly
//! one line, `{"id":N,"distance":D}` or `{"id":N,"error":"..."}`, in request
//! order. Workers never see analytic conditions; they only return distances.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bench::{
    aggregate, numeric_correct, suite_trial, Condition, Mode, SuiteOptions, SuiteResult,
    TrialOutcome, TrialRecord,
};
use crate::error::Error;
use crate::signal::{self, BenchConfig, SineParams};

pub const PROTOCOL_NAME: &str = "pitchgrad-extern";
pub const PROTOCOL_VERSION: u64 = 1;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum ExternError {
    #[error("failed to start worker `{cmd}`: {source}")]
    Spawn {
        cmd: String,
        #[source]
        source: std::io::Error,
    },
    #[error("handshake failed: {0}")]
    Handshake(String),
    #[error("worker speaks protocol version {got}, expected {PROTOCOL_VERSION}")]
    VersionMismatch { got: u64 },
    #[error("no response within {ms} ms")]
    Timeout { ms: u128 },
    #[error("malformed worker output {line:?}: {reason}")]
    Malformed { line: String, reason: String },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("worker reported an error: {0}")]
    Worker(String),
    #[error("worker closed its output")]
    Closed,
    #[error("i/o error talking to worker: {0}")]
    Io(#[from] std::io::Error),
}

impl ExternError {
    /// Errors after which the session cannot continue.
    pub fn is_fatal(&self) -> bool {
        !matches!(self, ExternError::Timeout { .. } | ExternError::Worker(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternRequest {
    pub id: u64,
    pub sample_rate_hz: f64,
    pub target: Vec<f64>,
    pub prediction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternResponse {
    pub id: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Banner {
    pub protocol: String,
    pub version: u64,
    pub name: String,
}

impl Banner {
    pub fn current(name: impl Into<String>) -> Self {
        Self { protocol: PROTOCOL_NAME.into(), version: PROTOCOL_VERSION, name: name.into() }
    }
}

/// Validate a banner line.
pub fn parse_banner(line: &str) -> Result<Banner, ExternError> {
    let v: Value = serde_json::from_str(line.trim())
        .map_err(|e| ExternError::Handshake(format!("banner {line:?} is not JSON: {e}")))?;
    if v.get("protocol").and_then(Value::as_str) != Some(PROTOCOL_NAME) {
        return Err(ExternError::Handshake(format!("unexpected banner {line:?}")));
    }
    let version = v
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| ExternError::Handshake(format!("banner without version: {line:?}")))?;
    if version != PROTOCOL_VERSION {
        return Err(ExternError::VersionMismatch { got: version });
    }
    let name = v
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| ExternError::Handshake(format!("banner without name: {line:?}")))?;
    Ok(Banner::current(name))
}

/// Validate one response line against the expected id.
pub fn parse_response(line: &str) -> Result<ExternResponse, ExternError> {
    let malformed = |reason: String| ExternError::Malformed { line: line.to_string(), reason };
    let v: Value = serde_json::from_str(line.trim()).map_err(|e| malformed(e.to_string()))?;
    let id = v
        .get("id")
        .and_then(Value::as_u64)
        .ok_or_else(|| malformed("missing integer id".into()))?;
    let error = v.get("error").and_then(Value::as_str).map(str::to_string);
    let distance = match v.get("distance") {
        None | Some(Value::Null) => None,
        Some(d) => Some(d.as_f64().ok_or_else(|| malformed("distance is not a number".into()))?),
    };
    Ok(ExternResponse { id, distance, error })
}

/// One running worker process bound to one client.
pub struct ExternSession {
    cmd: String,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    banner: Banner,
    next_id: u64,
    timeout: Duration,
}

impl std::fmt::Debug for ExternSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternSession")
            .field("cmd", &self.cmd)
            .field("worker", &self.banner.name)
            .field("next_id", &self.next_id)
            .finish()
    }
}

impl ExternSession {
    /// Start `cmd` through the shell and complete the handshake.
    pub fn start(cmd: &str, timeout: Duration) -> Result<Self, ExternError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(cmd)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ExternError::Spawn { cmd: cmd.to_string(), source })?;
        let stdout = child.stdout.take().expect("piped stdout");
        let stdin = child.stdin.take();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut session = Self {
            cmd: cmd.to_string(),
            child,
            stdin,
            lines: rx,
            banner: Banner::current(""),
            next_id: 1,
            timeout,
        };
        let first = session
            .read_line()
            .map_err(|e| ExternError::Handshake(format!("no banner: {e}")))?;
        session.banner = parse_banner(&first)?;
        Ok(session)
    }

    pub fn banner(&self) -> &Banner {
        &self.banner
    }

    pub fn name(&self) -> &str {
        &self.banner.name
    }

    fn read_line(&self) -> Result<String, ExternError> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(ExternError::Io(e)),
            Err(RecvTimeoutError::Timeout) => {
                Err(ExternError::Timeout { ms: self.timeout.as_millis() })
            }
            Err(RecvTimeoutError::Disconnected) => Err(ExternError::Closed),
        }
    }

    /// Send one request and wait for its response.
    pub fn evaluate(
        &mut self,
        sample_rate_hz: f64,
        target: &[f64],
        prediction: &[f64],
    ) -> Result<ExternResponse, ExternError> {
        if target.len() != prediction.len() {
            return Err(ExternError::Protocol(format!(
                "arrays differ in length ({} vs {})",
                target.len(),
                prediction.len()
            )));
        }
        let id = self.next_id;
        self.next_id += 1;
        let req = ExternRequest {
            id,
            sample_rate_hz,
            target: target.to_vec(),
            prediction: prediction.to_vec(),
        };
        let mut line = serde_json::to_string(&req).expect("request serializes");
        line.push('\n');
        let stdin = self.stdin.as_mut().ok_or(ExternError::Closed)?;
        stdin.write_all(line.as_bytes())?;
        stdin.flush()?;
        loop {
            let resp = parse_response(&self.read_line()?)?;
            if resp.id < id {
                // late answer to a request that already timed out
                continue;
            }
            if resp.id > id {
                return Err(ExternError::Protocol(format!(
                    "response id {} while waiting for {id}",
                    resp.id
                )));
            }
            return Ok(resp);
        }
    }

    /// Distance between two waveforms; worker-side errors and invalid values
    /// become [`ExternError`]s.
    pub fn distance(
        &mut self,
        sample_rate_hz: f64,
        target: &[f64],
        prediction: &[f64],
    ) -> Result<f64, ExternError> {
        let resp = self.evaluate(sample_rate_hz, target, prediction)?;
        if let Some(msg) = resp.error {
            return Err(ExternError::Worker(msg));
        }
        match resp.distance {
            Some(d) if d.is_finite() && d >= 0.0 => Ok(d),
            Some(d) => Err(ExternError::Protocol(format!("invalid distance {d}"))),
            None => Err(ExternError::Protocol("response has neither distance nor error".into())),
        }
    }
}

impl Drop for ExternSession {
    fn drop(&mut self) {
        drop(self.stdin.take());
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Paired numeric benchmark of an external distance, one session per
/// contiguous block of trials. Results do not depend on the session count.
pub fn run_extern_suite(
    sessions: &mut [ExternSession],
    conditions: &[Condition],
    opts: &SuiteOptions,
    cfg: &BenchConfig,
) -> Result<SuiteResult, Error> {
    if sessions.is_empty() {
        return Err(Error::Config("no worker sessions".into()));
    }
    if opts.n_trials == 0 {
        return Err(Error::Config("n_trials must be at least 1".into()));
    }
    for c in conditions {
        c.validate()?;
        if c.mode == Mode::Analytic {
            return Err(Error::AnalyticUnsupported("external".into()));
        }
    }
    let n = opts.n_trials;
    let chunk = n.div_ceil(sessions.len());
    let per_session: Vec<Result<Vec<Vec<TrialOutcome>>, ExternError>> = thread::scope(|s| {
        let handles: Vec<_> = sessions
            .iter_mut()
            .enumerate()
            .map(|(k, session)| {
                let range = (k * chunk).min(n)..((k + 1) * chunk).min(n);
                s.spawn(move || {
                    range
                        .map(|i| extern_trial(session, conditions, cfg, i as u64, opts.swap_roles))
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("session thread")).collect()
    });
    let mut records: Vec<Vec<TrialOutcome>> = vec![Vec::with_capacity(n); conditions.len()];
    for block in per_session {
        for trial in block? {
            for (c, outcome) in trial.into_iter().enumerate() {
                records[c].push(outcome);
            }
        }
    }
    let reports = records
        .iter()
        .zip(conditions)
        .map(|(rs, c)| aggregate("external", *c, rs, opts.error_policy))
        .collect();
    Ok(SuiteResult { reports, records })
}

fn extern_trial(
    session: &mut ExternSession,
    conditions: &[Condition],
    cfg: &BenchConfig,
    index: u64,
    swap: bool,
) -> Result<Vec<TrialOutcome>, ExternError> {
    let (target, prediction) = suite_trial(cfg, index, swap);
    let wave = |p: &SineParams| signal::synthesize_real(p, cfg.sample_rate_hz, cfg.n_samples);
    let xt = wave(&target);
    let d_pred = soft(session.distance(cfg.sample_rate_hz, &xt, &wave(&prediction)))?;
    conditions
        .iter()
        .map(|c| {
            let perturbed = match signal::perturb(&prediction, &target, c.axis, c.eps()) {
                Ok(p) => p,
                Err(e) => return Ok(Err(e.to_string())),
            };
            let d_pert = soft(session.distance(cfg.sample_rate_hz, &xt, &wave(&perturbed)))?;
            Ok(match (&d_pred, &d_pert) {
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
                (Ok(dp), Ok(dq)) => Ok(TrialRecord {
                    index,
                    target,
                    prediction,
                    correct: numeric_correct(*dp, *dq),
                    d_pred: *dp,
                    d_pert_or_derivative: *dq,
                    out_of_range: !(cfg.pitch_in_range(perturbed.pitch_hz)
                        && cfg.level_in_range(perturbed.level_db)),
                }),
            })
        })
        .collect()
}

/// Split recoverable failures (kept as trial errors) from fatal ones.
fn soft(r: Result<f64, ExternError>) -> Result<Result<f64, String>, ExternError> {
    match r {
        Ok(d) => Ok(Ok(d)),
        Err(e) if !e.is_fatal() => Ok(Err(e.to_string())),
        Err(e) => Err(e),
    }
}
