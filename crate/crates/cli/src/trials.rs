use std::io::Write;
use std::time::Duration;

use serde::Serialize;
use serde_json::json;

use pitchgrad::bench::{
    run_suite, write_reports_csv, write_table_csv, AccuracyReport, Condition, ErrorPolicy, Mode,
    SuiteOptions, SuiteResult, DEFAULT_TRIALS,
};
use pitchgrad::distance::{Distance, DistanceSpec};
use pitchgrad::extern_protocol::{run_extern_suite, ExternSession};
use pitchgrad::signal::{Axis, BenchConfig};

use crate::args::{list_or, AxisSet, ConditionSet, FileConfig, Format, Resolved, TrialsArgs};
use crate::failure::Failure;
use crate::list;
use crate::output::{self, RunDir};

const DEFAULT_TIMEOUT_MS: u64 = 30_000;

pub fn conditions(set: ConditionSet, axes: AxisSet) -> Vec<Condition> {
    Condition::table_columns()
        .into_iter()
        .filter(|c| match axes {
            AxisSet::Pitch => c.axis == Axis::Pitch,
            AxisSet::Level => c.axis == Axis::Level,
            AxisSet::Both => true,
        })
        .filter(|c| match set {
            ConditionSet::All => true,
            ConditionSet::Analytic => c.mode == Mode::Analytic,
            ConditionSet::Fine => *c == Condition::fine(c.axis),
            ConditionSet::Coarse => *c == Condition::coarse(c.axis),
        })
        .collect()
}

pub fn run(args: TrialsArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let res = Resolved::new(&args.common, &file)?;
    let extern_cmd = args.extern_cmd.clone().or_else(|| file.extern_cmd.clone());
    let mut names = list_or(&args.specs, &file.spec, &[]);
    if names.is_empty() && extern_cmd.is_none() {
        names.push("all".into());
    }
    if names.iter().any(|n| n == "external") {
        return Err(Failure::usage("spec `external` is selected with --extern-cmd"));
    }
    let specs = list::resolve(&names)?;
    let conds = conditions(
        args.condition.or(file.condition).unwrap_or_default(),
        args.axis.or(file.axis).unwrap_or_default(),
    );
    let error_policy: ErrorPolicy = args.error_policy.or(file.error_policy).map(Into::into).unwrap_or_default();
    let opts = SuiteOptions {
        n_trials: args.n_trials.or(file.n_trials).unwrap_or(DEFAULT_TRIALS),
        workers: res.workers,
        error_policy,
        swap_roles: args.swap_roles || file.swap_roles.unwrap_or(false),
    };
    let timeout_ms = args.timeout_ms.or(file.timeout_ms).unwrap_or(DEFAULT_TIMEOUT_MS);
    if opts.n_trials == 0 {
        return Err(Failure::usage("--n-trials must be at least 1"));
    }
    if conds.is_empty() {
        return Err(Failure::usage("no conditions selected"));
    }

    let distances = specs
        .iter()
        .map(|s| Distance::new(s.clone(), &res.bench))
        .collect::<Result<Vec<_>, _>>()?;
    log::info!(
        "{} trials × {} spec(s) × {} condition(s), seed {}",
        opts.n_trials,
        distances.len() + extern_cmd.is_some() as usize,
        conds.len(),
        res.bench.seed
    );
    let mut result = if distances.is_empty() {
        SuiteResult { reports: Vec::new(), records: Vec::new() }
    } else {
        run_suite(&distances, &conds, &opts, &res.bench)?
    };

    let mut all_specs = specs.clone();
    if let Some(cmd) = &extern_cmd {
        let ext = run_external(cmd, &conds, &opts, &res.bench, timeout_ms)?;
        result.reports.extend(ext.reports);
        result.records.extend(ext.records);
        all_specs.push(DistanceSpec::external(cmd.clone()));
    }

    let mut dir = RunDir::create(res.out.as_deref())?;
    match res.format {
        Format::Csv => {
            dir.write("reports.csv", |w| write_reports_csv(w, &result.reports))?;
            dir.write("table.csv", |w| write_table_csv(w, &result.reports, &conds))?;
        }
        Format::Json => dir.write_json("reports.json", &ReportsJson::new(&result.reports, &conds))?,
    }
    dir.write("trials.csv", |w| write_records_csv(w, &result))?;
    let options = json!({
        "n_trials": opts.n_trials,
        "conditions": conds,
        "swap_roles": opts.swap_roles,
        "error_policy": opts.error_policy,
        "extern_cmd": extern_cmd,
        "timeout_ms": extern_cmd.as_ref().map(|_| timeout_ms),
        "format": res.format,
    });
    let path = dir.finish("trials", &res.bench, &all_specs, options)?;

    output::print(&format_table(&result.reports, &conds))?;
    log::info!("results in {}", path.display());
    Ok(())
}

fn run_external(
    cmd: &str,
    conds: &[Condition],
    opts: &SuiteOptions,
    cfg: &BenchConfig,
    timeout_ms: u64,
) -> Result<SuiteResult, Failure> {
    let numeric: Vec<Condition> = conds.iter().copied().filter(|c| c.mode != Mode::Analytic).collect();
    if numeric.is_empty() {
        log::warn!("external distances support numeric conditions only; nothing to run");
        return Ok(SuiteResult { reports: Vec::new(), records: Vec::new() });
    }
    let n_sessions = match opts.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(opts.n_trials);
    let timeout = Duration::from_millis(timeout_ms);
    let mut sessions = (0..n_sessions)
        .map(|_| ExternSession::start(cmd, timeout))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Worker(e.to_string()))?;
    log::info!("external worker `{}`, {n_sessions} session(s)", sessions[0].name());
    Ok(run_extern_suite(&mut sessions, &numeric, opts, cfg)?)
}

/// One line per scored trial, for paired comparisons between specs.
fn write_records_csv<W: Write>(mut w: W, result: &SuiteResult) -> std::io::Result<()> {
    writeln!(w, "spec,axis,mode,eps,index,correct,d_pred,d_pert_or_derivative,error")?;
    for (report, records) in result.reports.iter().zip(&result.records) {
        let c = &report.condition;
        for (i, outcome) in records.iter().enumerate() {
            let prefix = format!("{},{},{},{},{i}", report.spec_name, c.axis.name(), c.mode_name(), c.eps());
            match outcome {
                Ok(r) => writeln!(w, "{prefix},{},{},{},", r.correct as u8, r.d_pred, r.d_pert_or_derivative)?,
                Err(e) => writeln!(w, "{prefix},0,,,\"{}\"", e.replace('"', "'"))?,
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportsJson<'a> {
    reports: &'a [AccuracyReport],
    table: Table,
}

#[derive(Serialize)]
struct Table {
    columns: Vec<String>,
    rows: Vec<TableRow>,
}

#[derive(Serialize)]
struct TableRow {
    spec: String,
    accuracy: Vec<Option<f64>>,
}

impl<'a> ReportsJson<'a> {
    fn new(reports: &'a [AccuracyReport], conds: &[Condition]) -> Self {
        let mut rows: Vec<TableRow> = Vec::new();
        for r in reports {
            if rows.iter().any(|row| row.spec == r.spec_name) {
                continue;
            }
            let accuracy = conds
                .iter()
                .map(|c| {
                    reports
                        .iter()
                        .find(|x| x.spec_name == r.spec_name && x.condition == *c)
                        .map(|x| x.accuracy)
                })
                .collect();
            rows.push(TableRow { spec: r.spec_name.clone(), accuracy });
        }
        Self { reports, table: Table { columns: conds.iter().map(|c| c.to_string()).collect(), rows } }
    }
}

fn format_table(reports: &[AccuracyReport], conds: &[Condition]) -> String {
    let table = ReportsJson::new(reports, conds).table;
    let width = table.rows.iter().map(|r| r.spec.len()).max().unwrap_or(4).max(4);
    let mut text = format!("{:<width$}", "spec");
    for c in &table.columns {
        text.push_str(&format!("  {c:>12}"));
    }
    text.push('\n');
    for row in &table.rows {
        let mut line = format!("{:<width$}", row.spec);
        for a in &row.accuracy {
            match a {
                Some(a) => line.push_str(&format!("  {a:>12.3}")),
                None => line.push_str(&format!("  {:>12}", "")),
            }
        }
        text.push_str(line.trim_end());
        text.push('\n');
    }
    text
}
