//! Flags, and the optional JSON config file that mirrors them.
//!
//! Every flag has a config key of the same name in snake_case. A flag given
//! on the command line wins over the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use pitchgrad::bench::ErrorPolicy;
use pitchgrad::landscape::PhasePolicy;
use pitchgrad::signal::BenchConfig;

use crate::failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "pitchgrad", version, about = "Gradient-direction benchmark for audio distances on pure sinusoids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ranking accuracy of distances under analytic and perturbation conditions.
    Trials(TrialsArgs),
    /// Distance from fixed target pitches to a sweep of prediction pitches.
    Curve(CurveArgs),
    /// Distance from a fixed target over a pitch × level grid.
    Heatmap(HeatmapArgs),
    /// Per-cell pitch and level derivatives of the distance to a target.
    Field(FieldArgs),
    /// Builtin distances and their hyperparameters.
    List(ListArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionSet {
    Analytic,
    Fine,
    Coarse,
    #[default]
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisSet {
    Pitch,
    Level,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseArg {
    #[default]
    Random,
    Zero,
}

impl From<PhaseArg> for PhasePolicy {
    fn from(p: PhaseArg) -> Self {
        match p {
            PhaseArg::Random => PhasePolicy::Random,
            PhaseArg::Zero => PhasePolicy::Zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldModeArg {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorPolicyArg {
    CountIncorrect,
    Skip,
}

impl From<ErrorPolicyArg> for ErrorPolicy {
    fn from(p: ErrorPolicyArg) -> Self {
        match p {
            ErrorPolicyArg::CountIncorrect => ErrorPolicy::CountIncorrect,
            ErrorPolicyArg::Skip => ErrorPolicy::Skip,
        }
    }
}

/// Flags shared by every command that writes files.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON file mirroring these flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Run seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: ./out/<UTC timestamp>].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TrialsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Distance to benchmark; repeatable, or `all` for every builtin.
    #[arg(long = "spec", value_name = "NAME")]
    pub specs: Vec<String>,
    #[arg(long)]
    pub n_trials: Option<usize>,
    #[arg(long, value_enum)]
    pub condition: Option<ConditionSet>,
    #[arg(long, value_enum)]
    pub axis: Option<AxisSet>,
    /// Benchmark an external worker as spec `external`.
    #[arg(long, value_name = "COMMAND")]
    pub extern_cmd: Option<String>,
    /// Per-request timeout for external workers.
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    /// Let the second sampled sinusoid play the target.
    #[arg(long)]
    pub swap_roles: bool,
    #[arg(long, value_enum)]
    pub error_policy: Option<ErrorPolicyArg>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Distance to sweep; repeatable.
    #[arg(long = "spec", value_name = "NAME")]
    pub specs: Vec<String>,
    /// Target pitches in Hz [default: 130,346,922].
    #[arg(long, value_delimiter = ',')]
    pub targets: Vec<f64>,
    /// Level of targets and predictions [default: -12.5].
    #[arg(long, allow_hyphen_values = true)]
    pub level_db: Option<f64>,
    /// Sweep points per target [default: 400].
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub phase: Option<PhaseArg>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Distance to map; repeatable.
    #[arg(long = "spec", value_name = "NAME")]
    pub specs: Vec<String>,
    /// fig2, fig3, fig3-supp1, fig3-supp2 or fig4.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub target_hz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub target_db: Option<f64>,
    /// Cells along both axes.
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub pitch_cells: Option<usize>,
    #[arg(long)]
    pub level_cells: Option<usize>,
    #[arg(long, value_enum)]
    pub phase: Option<PhaseArg>,
}

#[derive(Debug, Clone, Args)]
pub struct HeatmapArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Derivatives by dual numbers or by symmetric differences [default: numeric].
    #[arg(long, value_enum)]
    pub mode: Option<FieldModeArg>,
    /// Pitch half-step of numeric differences [default: one cell].
    #[arg(long)]
    pub eps_cents: Option<f64>,
    /// Level half-step of numeric differences [default: one cell].
    #[arg(long)]
    pub eps_db: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ListArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv, hide_default_value = true)]
    pub format: Format,
}

/// Contents of a `--config` file. Keys irrelevant to a command are ignored.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub bench: Option<BenchConfig>,
    pub spec: Option<Vec<String>>,
    pub n_trials: Option<usize>,
    pub condition: Option<ConditionSet>,
    pub axis: Option<AxisSet>,
    pub extern_cmd: Option<String>,
    pub timeout_ms: Option<u64>,
    pub swap_roles: Option<bool>,
    pub error_policy: Option<ErrorPolicyArg>,
    pub targets: Option<Vec<f64>>,
    pub level_db: Option<f64>,
    pub points: Option<usize>,
    pub preset: Option<String>,
    pub target_hz: Option<f64>,
    pub target_db: Option<f64>,
    pub cells: Option<usize>,
    pub pitch_cells: Option<usize>,
    pub level_cells: Option<usize>,
    pub phase: Option<PhaseArg>,
    pub mode: Option<FieldModeArg>,
    pub eps_cents: Option<f64>,
    pub eps_db: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Settings every file-writing command resolves the same way.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub bench: BenchConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
}

impl Resolved {
    pub fn new(common: &CommonArgs, file: &FileConfig) -> Result<Self, Failure> {
        let mut bench = file.bench.unwrap_or_default();
        bench.seed = common.seed.or(file.seed).unwrap_or(bench.seed);
        bench.validate()?;
        Ok(Self {
            bench,
            out: common.out.clone().or_else(|| file.out.clone()),
            format: common.format.or(file.format).unwrap_or_default(),
            workers: common.workers.or(file.workers).unwrap_or(0),
        })
    }
}

/// Flag list if non-empty, else the config list, else `default`.
pub fn list_or<T: Clone>(flag: &[T], file: &Option<Vec<T>>, default: &[T]) -> Vec<T> {
    if !flag.is_empty() {
        flag.to_vec()
    } else if let Some(v) = file {
        v.clone()
    } else {
        default.to_vec()
    }
}
