//! Gradient-sign (dissimilarity) ranking accuracy.
//!
//! A trial samples a target and a prediction. In a numeric condition the
//! prediction is pushed a further `eps` away from the target along one axis
//! and the trial is correct when the distance grows. In the analytic
//! condition the derivative of the distance along that axis must point away
//! from the target. Zero derivatives and exact ties count as incorrect.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{Distance, Reference};
use crate::error::{Error, Result};
use crate::signal::{self, Axis, BenchConfig, SineParams};

/// Fine perturbation sizes: 30 cents, 2 dB.
pub const FINE_CENTS: f64 = 30.0;
pub const FINE_DB: f64 = 2.0;
/// Coarse perturbation sizes: 600 cents, 10 dB.
pub const COARSE_CENTS: f64 = 600.0;
pub const COARSE_DB: f64 = 10.0;
pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    /// Perturbation in cents (pitch) or dB (level).
    Numeric { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub axis: Axis,
    #[serde(flatten)]
    pub mode: Mode,
}

impl Condition {
    pub fn analytic(axis: Axis) -> Self {
        Self { axis, mode: Mode::Analytic }
    }

    pub fn numeric(axis: Axis, eps: f64) -> Self {
        Self { axis, mode: Mode::Numeric { eps } }
    }

    pub fn fine(axis: Axis) -> Self {
        Self::numeric(axis, match axis {
            Axis::Pitch => FINE_CENTS,
            Axis::Level => FINE_DB,
        })
    }

    pub fn coarse(axis: Axis) -> Self {
        Self::numeric(axis, match axis {
            Axis::Pitch => COARSE_CENTS,
            Axis::Level => COARSE_DB,
        })
    }

    /// The six columns of the accuracy table, in display order.
    pub fn table_columns() -> [Condition; 6] {
        [
            Self::analytic(Axis::Pitch),
            Self::fine(Axis::Pitch),
            Self::coarse(Axis::Pitch),
            Self::analytic(Axis::Level),
            Self::fine(Axis::Level),
            Self::coarse(Axis::Level),
        ]
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode {
            Mode::Analytic => "analytic",
            Mode::Numeric { .. } => "numeric",
        }
    }

    pub fn eps(&self) -> f64 {
        match self.mode {
            Mode::Analytic => 0.0,
            Mode::Numeric { eps } => eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::Numeric { eps } if !(eps > 0.0 && eps.is_finite()) => {
                Err(Error::Config(format!("perturbation {eps} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = match self.axis {
            Axis::Pitch => "c",
            Axis::Level => "dB",
        };
        match self.mode {
            Mode::Analytic => write!(f, "{} ±ε", self.axis.name()),
            Mode::Numeric { eps } => write!(f, "{} ±{eps}{unit}", self.axis.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub target: SineParams,
    pub prediction: SineParams,
    pub correct: bool,
    pub d_pred: f64,
    /// Distance to the perturbed prediction (numeric) or the directional
    /// derivative (analytic).
    pub d_pert_or_derivative: f64,
    /// Whether a numeric perturbation left the sampling range.
    pub out_of_range: bool,
}

/// How trials that fail to evaluate are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorPolicy {
    #[default]
    CountIncorrect,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub spec_name: String,
    pub condition: Condition,
    pub n_trials: usize,
    pub accuracy: f64,
    pub ci95_halfwidth: f64,
    pub n_errors: usize,
    pub out_of_range_fraction: f64,
}

/// Normal-approximation 95% binomial half-width.
pub fn ci95_halfwidth(accuracy: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    1.96 * (accuracy * (1.0 - accuracy) / n as f64).sqrt()
}

/// Score a trial from its two distances (numeric) or its derivative and the
/// signed axis offset of the prediction (analytic).
pub fn numeric_correct(d_pred: f64, d_perturbed: f64) -> bool {
    d_pred < d_perturbed
}

pub fn analytic_correct(derivative: f64, offset: f64) -> bool {
    derivative * offset.signum() > 0.0
}

/// One condition for one trial, against a prepared target.
pub fn run_trial_prepared(
    distance: &Distance,
    reference: &Reference,
    condition: &Condition,
    index: u64,
    target: &SineParams,
    prediction: &SineParams,
    d_pred: Option<f64>,
) -> Result<TrialRecord> {
    let cfg = distance.config();
    match condition.mode {
        Mode::Numeric { eps } => {
            let perturbed = signal::perturb(prediction, target, condition.axis, eps)?;
            let d_pred = match d_pred {
                Some(d) => d,
                None => distance.distance_to(reference, prediction)?,
            };
            let d_pert = distance.distance_to(reference, &perturbed)?;
            Ok(TrialRecord {
                index,
                target: *target,
                prediction: *prediction,
                correct: numeric_correct(d_pred, d_pert),
                d_pred,
                d_pert_or_derivative: d_pert,
                out_of_range: !(cfg.pitch_in_range(perturbed.pitch_hz)
                    && cfg.level_in_range(perturbed.level_db)),
            })
        }
        Mode::Analytic => {
            let v = distance.seeded_distance_to(reference, prediction, condition.axis)?.value;
            let offset = signal::axis_offset(prediction, target, condition.axis);
            if offset == 0.0 {
                return Err(Error::Domain("prediction and target coincide on the axis".into()));
            }
            Ok(TrialRecord {
                index,
                target: *target,
                prediction: *prediction,
                correct: analytic_correct(v.der, offset),
                d_pred: v.val,
                d_pert_or_derivative: v.der,
                out_of_range: false,
            })
        }
    }
}

/// Evaluate a single trial from scratch.
pub fn run_trial(
    distance: &Distance,
    condition: &Condition,
    target: &SineParams,
    prediction: &SineParams,
) -> Result<TrialRecord> {
    condition.validate()?;
    let reference = distance.reference(target)?;
    run_trial_prepared(distance, &reference, condition, 0, target, prediction, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub n_trials: usize,
    pub workers: usize,
    pub error_policy: ErrorPolicy,
    /// Swap which sampled sinusoid plays the target.
    pub swap_roles: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            n_trials: DEFAULT_TRIALS,
            workers: 1,
            error_policy: ErrorPolicy::CountIncorrect,
            swap_roles: false,
        }
    }
}

/// Outcome of one (trial, spec, condition) cell.
pub type TrialOutcome = std::result::Result<TrialRecord, String>;

#[derive(Debug, Clone)]
pub struct SuiteResult {
    /// Row-major over `(spec, condition)` in input order.
    pub reports: Vec<AccuracyReport>,
    /// `records[r][i]` is trial `i` of report `r`.
    pub records: Vec<Vec<TrialOutcome>>,
}

/// Run a worker pool of `workers` threads (0 means rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// The trial pair for `index`, honoring `swap_roles`.
pub fn suite_trial(cfg: &BenchConfig, index: u64, swap_roles: bool) -> (SineParams, SineParams) {
    let (a, b) = signal::trial_params(cfg, index);
    if swap_roles {
        (b, a)
    } else {
        (a, b)
    }
}

/// Paired benchmark: the same sampled trials are scored by every distance
/// under every condition. Output is independent of `opts.workers`.
pub fn run_suite(
    distances: &[Distance],
    conditions: &[Condition],
    opts: &SuiteOptions,
    cfg: &BenchConfig,
) -> Result<SuiteResult> {
    if opts.n_trials == 0 {
        return Err(Error::Config("n_trials must be at least 1".into()));
    }
    for c in conditions {
        c.validate()?;
    }
    let per_trial: Vec<Result<Vec<TrialOutcome>>> = with_workers(opts.workers, || {
        (0..opts.n_trials as u64)
            .into_par_iter()
            .map(|i| score_trial(distances, conditions, cfg, i, opts.swap_roles))
            .collect()
    })?;
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;

    let cells = distances.len() * conditions.len();
    let mut records: Vec<Vec<TrialOutcome>> = vec![Vec::with_capacity(opts.n_trials); cells];
    for trial in per_trial {
        for (cell, outcome) in trial.into_iter().enumerate() {
            records[cell].push(outcome);
        }
    }
    let reports = records
        .iter()
        .enumerate()
        .map(|(cell, rs)| {
            let d = &distances[cell / conditions.len()];
            aggregate(d.name(), conditions[cell % conditions.len()], rs, opts.error_policy)
        })
        .collect();
    Ok(SuiteResult { reports, records })
}

fn score_trial(
    distances: &[Distance],
    conditions: &[Condition],
    cfg: &BenchConfig,
    index: u64,
    swap: bool,
) -> Result<Vec<TrialOutcome>> {
    let (target, prediction) = suite_trial(cfg, index, swap);
    let mut out = Vec::with_capacity(distances.len() * conditions.len());
    for d in distances {
        let reference = match d.reference(&target) {
            Ok(r) => r,
            Err(e @ Error::NonFinite { .. }) => return Err(e),
            Err(e) => {
                out.extend(conditions.iter().map(|_| Err(e.to_string())));
                continue;
            }
        };
        let needs_pred = conditions.iter().any(|c| matches!(c.mode, Mode::Numeric { .. }));
        let d_pred = if needs_pred {
            match d.distance_to(&reference, &prediction) {
                Ok(v) => Some(Ok(v)),
                Err(e @ Error::NonFinite { .. }) => return Err(e),
                Err(e) => Some(Err(e.to_string())),
            }
        } else {
            None
        };
        for c in conditions {
            let outcome = match (&c.mode, &d_pred) {
                (Mode::Numeric { .. }, Some(Err(e))) => Err(e.clone()),
                _ => {
                    let pred = d_pred.as_ref().and_then(|r| r.as_ref().ok().copied());
                    match run_trial_prepared(d, &reference, c, index, &target, &prediction, pred) {
                        Ok(r) => Ok(r),
                        Err(e @ Error::NonFinite { .. }) => return Err(e),
                        Err(e) => Err(e.to_string()),
                    }
                }
            };
            out.push(outcome);
        }
    }
    Ok(out)
}

/// Reduce per-trial outcomes (in index order) into a report.
pub fn aggregate(
    spec_name: &str,
    condition: Condition,
    outcomes: &[TrialOutcome],
    policy: ErrorPolicy,
) -> AccuracyReport {
    let mut n = 0usize;
    let mut correct = 0usize;
    let mut errors = 0usize;
    let mut out_of_range = 0usize;
    for o in outcomes {
        match o {
            Ok(r) => {
                n += 1;
                correct += r.correct as usize;
                out_of_range += r.out_of_range as usize;
            }
            Err(_) => {
                errors += 1;
                if policy == ErrorPolicy::CountIncorrect {
                    n += 1;
                }
            }
        }
    }
    let accuracy = if n == 0 { 0.0 } else { correct as f64 / n as f64 };
    AccuracyReport {
        spec_name: spec_name.to_string(),
        condition,
        n_trials: n,
        accuracy,
        ci95_halfwidth: ci95_halfwidth(accuracy, n),
        n_errors: errors,
        out_of_range_fraction: if n == 0 { 0.0 } else { out_of_range as f64 / n as f64 },
    }
}

pub const REPORT_CSV_HEADER: &str = "spec,axis,mode,eps,n,accuracy,ci95";

/// Long-form report table with the fixed column order of
/// [`REPORT_CSV_HEADER`].
pub fn write_reports_csv<W: Write>(mut w: W, reports: &[AccuracyReport]) -> std::io::Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{:.6},{:.6}",
            r.spec_name,
            r.condition.axis.name(),
            r.condition.mode_name(),
            r.condition.eps(),
            r.n_trials,
            r.accuracy,
            r.ci95_halfwidth
        )?;
    }
    Ok(())
}

/// Wide table: one row per spec (first-appearance order), one column per
/// condition. Cells without a report stay empty.
pub fn write_table_csv<W: Write>(
    mut w: W,
    reports: &[AccuracyReport],
    conditions: &[Condition],
) -> std::io::Result<()> {
    write!(w, "spec")?;
    for c in conditions {
        write!(w, ",{c}")?;
    }
    writeln!(w)?;
    let mut specs: Vec<&str> = Vec::new();
    for r in reports {
        if !specs.contains(&r.spec_name.as_str()) {
            specs.push(&r.spec_name);
        }
    }
    for spec in specs {
        write!(w, "{spec}")?;
        for c in conditions {
            match reports.iter().find(|r| r.spec_name == spec && r.condition == *c) {
                Some(r) => write!(w, ",{:.3}", r.accuracy)?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
