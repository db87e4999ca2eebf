//! Distance curves, heatmaps and gradient fields over the sinusoid
//! parameter plane.
//!
//! Grids are indexed `(row, col)` with rows running over level (ascending dB)
//! and columns over pitch (ascending Hz). Cell centers are log-spaced in
//! pitch and linear in level. Every prediction gets its own phase, drawn from
//! the landscape substream of the configured seed, unless [`PhasePolicy::Zero`]
//! is selected.

use std::f64::consts::TAU;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::signal::{self, Axis, BenchConfig, SineParams, LANDSCAPE_DOMAIN};

pub const DEFAULT_CELLS: usize = 80;
pub const DEFAULT_TARGET_HZ: f64 = 346.0;
pub const DEFAULT_TARGET_DB: f64 = -12.5;
pub const CURVE_TARGETS_HZ: [f64; 3] = [130.0, 346.0, 922.0];
pub const DEFAULT_CURVE_POINTS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhasePolicy {
    /// One uniform phase per prediction from the landscape substream.
    #[default]
    Random,
    /// Every prediction starts at phase 0.
    Zero,
}

impl PhasePolicy {
    /// Phase of work item `index`.
    pub fn phase(self, seed: u64, index: u64) -> f64 {
        match self {
            PhasePolicy::Zero => 0.0,
            PhasePolicy::Random => {
                signal::substream(seed, LANDSCAPE_DOMAIN, index).gen_range(0.0..TAU)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub pitch_cells: usize,
    pub level_cells: usize,
    pub pitch_range_hz: (f64, f64),
    pub level_range_db: (f64, f64),
    pub target: SineParams,
    #[serde(default)]
    pub phase: PhasePolicy,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::full(SineParams::new(DEFAULT_TARGET_DB, DEFAULT_TARGET_HZ, 0.0))
    }
}

impl GridSpec {
    /// 80×80 cells over the full sampling ranges.
    pub fn full(target: SineParams) -> Self {
        let cfg = BenchConfig::default();
        Self {
            pitch_cells: DEFAULT_CELLS,
            level_cells: DEFAULT_CELLS,
            pitch_range_hz: cfg.pitch_range_hz,
            level_range_db: cfg.level_range_db,
            target,
            phase: PhasePolicy::Random,
        }
    }

    /// `cells × cells` grid centered on `target` with the given resolution.
    pub fn zoomed(target: SineParams, cells: usize, cents_per_cell: f64, db_per_cell: f64) -> Self {
        let half_cents = cents_per_cell * cells as f64 / 2.0;
        let half_db = db_per_cell * cells as f64 / 2.0;
        Self {
            pitch_cells: cells,
            level_cells: cells,
            pitch_range_hz: (
                signal::shift_cents(target.pitch_hz, -half_cents),
                signal::shift_cents(target.pitch_hz, half_cents),
            ),
            level_range_db: (target.level_db - half_db, target.level_db + half_db),
            target,
            phase: PhasePolicy::Random,
        }
    }

    pub fn with_phase(mut self, phase: PhasePolicy) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.pitch_cells < 2 || self.level_cells < 2 {
            return Err(Error::Config("grids need at least 2 cells per axis".into()));
        }
        let (plo, phi) = self.pitch_range_hz;
        let (llo, lhi) = self.level_range_db;
        if !(plo > 0.0 && plo < phi && phi.is_finite()) {
            return Err(Error::Config(format!("pitch range {plo}..{phi} Hz invalid")));
        }
        if !(llo < lhi && llo.is_finite() && lhi.is_finite()) {
            return Err(Error::Config(format!("level range {llo}..{lhi} dB invalid")));
        }
        if !(self.target.pitch_hz > 0.0 && self.target.level_db.is_finite()) {
            return Err(Error::Config("grid target must have positive pitch".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.pitch_cells * self.level_cells
    }

    pub fn cents_per_cell(&self) -> f64 {
        signal::cents_between(self.pitch_range_hz.0, self.pitch_range_hz.1) / self.pitch_cells as f64
    }

    pub fn db_per_cell(&self) -> f64 {
        (self.level_range_db.1 - self.level_range_db.0) / self.level_cells as f64
    }

    /// Pitch of column `col`. Cells are sampled at their low edge, so the
    /// grid starts exactly at the low end of each range.
    pub fn pitch_at(&self, col: usize) -> f64 {
        signal::shift_cents(self.pitch_range_hz.0, col as f64 * self.cents_per_cell())
    }

    pub fn level_at(&self, row: usize) -> f64 {
        self.level_range_db.0 + row as f64 * self.db_per_cell()
    }

    /// Prediction at a cell, phase included.
    pub fn cell(&self, row: usize, col: usize, seed: u64) -> SineParams {
        let index = (row * self.pitch_cells + col) as u64;
        SineParams::new(self.level_at(row), self.pitch_at(col), self.phase.phase(seed, index))
    }

    /// Cells whose sample points are nearest the target, measured in cell
    /// units. More than one when the target sits midway between two.
    pub fn target_cells(&self) -> Vec<(usize, usize)> {
        let col_pos = signal::cents_between(self.pitch_range_hz.0, self.target.pitch_hz)
            / self.cents_per_cell();
        let row_pos = (self.target.level_db - self.level_range_db.0) / self.db_per_cell();
        let nearest = |pos: f64, n: usize| -> Vec<usize> {
            let lo = pos.floor().clamp(0.0, (n - 1) as f64) as usize;
            let hi = pos.ceil().clamp(0.0, (n - 1) as f64) as usize;
            let (dl, dh) = ((pos - lo as f64).abs(), (hi as f64 - pos).abs());
            if lo == hi || (dl - dh).abs() < 1e-9 {
                let mut v = vec![lo, hi];
                v.dedup();
                v
            } else if dl < dh {
                vec![lo]
            } else {
                vec![hi]
            }
        };
        let rows = nearest(row_pos, self.level_cells);
        let cols = nearest(col_pos, self.pitch_cells);
        rows.iter().flat_map(|&r| cols.iter().map(move |&c| (r, c))).collect()
    }
}

/// Named grid presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig2,
    Fig3,
    Fig3Supp1,
    Fig3Supp2,
    Fig4,
}

impl Preset {
    pub const ALL: [Preset; 5] =
        [Preset::Fig2, Preset::Fig3, Preset::Fig3Supp1, Preset::Fig3Supp2, Preset::Fig4];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig3Supp1 => "fig3-supp1",
            Preset::Fig3Supp2 => "fig3-supp2",
            Preset::Fig4 => "fig4",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))
    }

    pub fn target(self) -> SineParams {
        match self {
            Preset::Fig3Supp1 => SineParams::new(-7.5, 130.0, 0.0),
            Preset::Fig3Supp2 => SineParams::new(-17.5, 922.0, 0.0),
            _ => SineParams::new(DEFAULT_TARGET_DB, DEFAULT_TARGET_HZ, 0.0),
        }
    }

    /// Heatmap/field grid; `fig2` has none of its own and maps to the
    /// default full grid.
    pub fn grid(self) -> GridSpec {
        self.grid_around(self.target())
    }

    /// The preset's grid layout with another target; zoomed presets follow
    /// the target.
    pub fn grid_around(self, target: SineParams) -> GridSpec {
        match self {
            Preset::Fig4 => GridSpec::zoomed(target, 10, 340.0, 1.0),
            _ => GridSpec::full(target),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub target_hz: f64,
    pub pred_hz: f64,
    pub distance: f64,
}

/// Sweep prediction pitch over `n_points` log-spaced pitches spanning the
/// configured pitch range, for each target pitch, both at `level_db`.
/// Targets have phase 0; predictions follow `phase`.
pub fn distance_curve(
    distance: &Distance,
    target_pitches: &[f64],
    level_db: f64,
    n_points: usize,
    phase: PhasePolicy,
) -> Result<Vec<CurvePoint>> {
    let cfg = distance.config();
    if n_points < 2 {
        return Err(Error::Config("a curve needs at least 2 points".into()));
    }
    for &f in target_pitches {
        if !cfg.pitch_in_range(f) {
            return Err(Error::Config(format!("target pitch {f} Hz outside the sampling range")));
        }
    }
    let (lo, hi) = cfg.pitch_range_hz;
    let span = signal::cents_between(lo, hi);
    let sweep: Vec<f64> = (0..n_points)
        .map(|k| signal::shift_cents(lo, span * k as f64 / (n_points - 1) as f64))
        .collect();
    let mut out = Vec::with_capacity(target_pitches.len() * n_points);
    for (t, &target_hz) in target_pitches.iter().enumerate() {
        let reference = distance.reference(&SineParams::new(level_db, target_hz, 0.0))?;
        let row: Vec<Result<CurvePoint>> = sweep
            .par_iter()
            .enumerate()
            .map(|(k, &pred_hz)| {
                let ph = phase.phase(cfg.seed, (t * n_points + k) as u64);
                let d = distance.distance_to(&reference, &SineParams::new(level_db, pred_hz, ph))?;
                Ok(CurvePoint { target_hz, pred_hz, distance: d })
            })
            .collect();
        out.extend(row.into_iter().collect::<Result<Vec<_>>>()?);
    }
    Ok(out)
}

/// Row-major grid of distances to the grid target.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl Heatmap {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.pitch_cells + col]
    }

    /// `(row, col)` of the smallest value; the first in row-major order on ties.
    pub fn argmin(&self) -> (usize, usize) {
        let i = self
            .values
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v < self.values[best] { i } else { best });
        (i / self.grid.pitch_cells, i % self.grid.pitch_cells)
    }
}

fn grid_cells(grid: &GridSpec) -> Vec<(usize, usize)> {
    (0..grid.level_cells)
        .flat_map(|r| (0..grid.pitch_cells).map(move |c| (r, c)))
        .collect()
}

pub fn heatmap(distance: &Distance, grid: &GridSpec) -> Result<Heatmap> {
    grid.validate()?;
    let seed = distance.config().seed;
    let reference = distance.reference(&grid.target)?;
    let values: Vec<Result<f64>> = grid_cells(grid)
        .into_par_iter()
        .map(|(r, c)| distance.distance_to(&reference, &grid.cell(r, c, seed)))
        .collect();
    Ok(Heatmap { grid: *grid, values: values.into_iter().collect::<Result<_>>()? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum FieldMode {
    Analytic,
    /// Symmetric differences with half-width `eps_cents` / `eps_db`.
    Numeric { eps_cents: f64, eps_db: f64 },
}

impl FieldMode {
    /// Numeric differences at the grid's own resolution.
    pub fn at_resolution(grid: &GridSpec) -> Self {
        FieldMode::Numeric { eps_cents: grid.cents_per_cell(), eps_db: grid.db_per_cell() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldCell {
    pub row: usize,
    pub col: usize,
    pub prediction: SineParams,
    pub d_dpitch_per_cent: f64,
    pub d_dlevel_per_db: f64,
}

/// Directional derivatives of the distance to the grid target at every cell.
pub fn gradient_field(distance: &Distance, grid: &GridSpec, mode: FieldMode) -> Result<Vec<FieldCell>> {
    grid.validate()?;
    if let FieldMode::Numeric { eps_cents, eps_db } = mode {
        if !(eps_cents > 0.0 && eps_db > 0.0) {
            return Err(Error::Config("difference steps must be positive".into()));
        }
    }
    let seed = distance.config().seed;
    let reference = distance.reference(&grid.target)?;
    let cells: Vec<Result<FieldCell>> = grid_cells(grid)
        .into_par_iter()
        .map(|(row, col)| {
            let p = grid.cell(row, col, seed);
            let (dp, dl) = match mode {
                FieldMode::Analytic => {
                    let dp = distance.seeded_distance_to(&reference, &p, Axis::Pitch)?.value.der;
                    let dl = distance.seeded_distance_to(&reference, &p, Axis::Level)?.value.der;
                    (dp / 1200.0, dl)
                }
                FieldMode::Numeric { eps_cents, eps_db } => {
                    let at = |q: SineParams| distance.distance_to(&reference, &q);
                    let up = SineParams { pitch_hz: signal::shift_cents(p.pitch_hz, eps_cents), ..p };
                    let down = SineParams { pitch_hz: signal::shift_cents(p.pitch_hz, -eps_cents), ..p };
                    let louder = SineParams { level_db: p.level_db + eps_db, ..p };
                    let softer = SineParams { level_db: p.level_db - eps_db, ..p };
                    (
                        (at(up)? - at(down)?) / (2.0 * eps_cents),
                        (at(louder)? - at(softer)?) / (2.0 * eps_db),
                    )
                }
            };
            Ok(FieldCell { row, col, prediction: p, d_dpitch_per_cent: dp, d_dlevel_per_db: dl })
        })
        .collect();
    cells.into_iter().collect()
}

pub const CURVE_CSV_HEADER: &str = "target_hz,pred_hz,distance";
pub const HEATMAP_CSV_HEADER: &str = "row,col,pred_hz,pred_db,distance";
pub const FIELD_CSV_HEADER: &str = "row,col,pred_hz,pred_db,d_dpitch_per_cent,d_dlevel_per_db";

pub fn write_curve_csv<W: Write>(mut w: W, points: &[CurvePoint]) -> std::io::Result<()> {
    writeln!(w, "{CURVE_CSV_HEADER}")?;
    for p in points {
        writeln!(w, "{},{},{}", p.target_hz, p.pred_hz, p.distance)?;
    }
    Ok(())
}

pub fn write_heatmap_csv<W: Write>(mut w: W, map: &Heatmap) -> std::io::Result<()> {
    writeln!(w, "{HEATMAP_CSV_HEADER}")?;
    let g = &map.grid;
    for r in 0..g.level_cells {
        for c in 0..g.pitch_cells {
            writeln!(w, "{r},{c},{},{},{}", g.pitch_at(c), g.level_at(r), map.get(r, c))?;
        }
    }
    Ok(())
}

pub fn write_field_csv<W: Write>(mut w: W, field: &[FieldCell]) -> std::io::Result<()> {
    writeln!(w, "{FIELD_CSV_HEADER}")?;
    for f in field {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            f.row,
            f.col,
            f.prediction.pitch_hz,
            f.prediction.level_db,
            f.d_dpitch_per_cent,
            f.d_dlevel_per_db
        )?;
    }
    Ok(())
}
