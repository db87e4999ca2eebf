use serde_json::json;

use pitchgrad::bench::with_workers;
use pitchgrad::distance::{Distance, DistanceSpec};
use pitchgrad::landscape::{
    distance_curve, gradient_field, heatmap, write_curve_csv, write_field_csv, write_heatmap_csv,
    FieldMode, GridSpec, Preset, CURVE_TARGETS_HZ, DEFAULT_CURVE_POINTS, DEFAULT_TARGET_DB,
};
use pitchgrad::signal::{BenchConfig, SineParams};

use crate::args::{
    list_or, CurveArgs, FieldArgs, FieldModeArg, FileConfig, Format, GridArgs, HeatmapArgs,
    Resolved,
};
use crate::failure::Failure;
use crate::list;
use crate::output::{self, RunDir};

/// Waveform-free commands need in-process distances.
fn landscape_specs(flag: &[String], file: &FileConfig) -> Result<Vec<DistanceSpec>, Failure> {
    let names = list_or(flag, &file.spec, &[]);
    if names.is_empty() {
        return Err(Failure::usage("select at least one distance with --spec"));
    }
    if names.iter().any(|n| n == "external") {
        return Err(Failure::usage("external distances are only supported by `trials`"));
    }
    list::resolve(&names)
}

fn compile(specs: &[DistanceSpec], cfg: &BenchConfig) -> Result<Vec<Distance>, Failure> {
    Ok(specs.iter().map(|s| Distance::new(s.clone(), cfg)).collect::<Result<_, _>>()?)
}

fn check_target(cfg: &BenchConfig, hz: f64, db: f64) -> Result<(), Failure> {
    if !cfg.pitch_in_range(hz) {
        let (lo, hi) = cfg.pitch_range_hz;
        return Err(Failure::usage(format!("target pitch {hz} Hz outside {lo}..{hi} Hz")));
    }
    if !cfg.level_in_range(db) {
        let (lo, hi) = cfg.level_range_db;
        return Err(Failure::usage(format!("target level {db} dB outside {lo}..{hi} dB")));
    }
    Ok(())
}

pub fn curve(args: CurveArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let res = Resolved::new(&args.common, &file)?;
    let specs = landscape_specs(&args.specs, &file)?;
    let targets = list_or(&args.targets, &file.targets, &CURVE_TARGETS_HZ);
    let level_db = args.level_db.or(file.level_db).unwrap_or(DEFAULT_TARGET_DB);
    let points = args.points.or(file.points).unwrap_or(DEFAULT_CURVE_POINTS);
    let phase = args.phase.or(file.phase).unwrap_or_default();
    for &t in &targets {
        check_target(&res.bench, t, level_db)?;
    }
    let distances = compile(&specs, &res.bench)?;

    let mut dir = RunDir::create(res.out.as_deref())?;
    for d in &distances {
        let pts = with_workers(res.workers, || {
            distance_curve(d, &targets, level_db, points, phase.into())
        })??;
        let name = format!("curve_{}.{}", d.name(), res.format.ext());
        match res.format {
            Format::Csv => dir.write(&name, |w| write_curve_csv(w, &pts))?,
            Format::Json => dir.write_json(&name, &pts)?,
        }
    }
    let options = json!({
        "targets_hz": targets,
        "level_db": level_db,
        "points": points,
        "phase": phase,
        "format": res.format,
    });
    dir.finish("curve", &res.bench, &specs, options)?;
    Ok(())
}

/// Grid from a preset, optionally re-targeted and re-sized.
fn resolve_grid(args: &GridArgs, file: &FileConfig, default: Preset, cfg: &BenchConfig) -> Result<GridSpec, Failure> {
    let preset = match args.preset.as_ref().or(file.preset.as_ref()) {
        Some(name) => Preset::parse(name).map_err(|e| Failure::usage(e.to_string()))?,
        None => default,
    };
    let base = preset.target();
    let hz = args.target_hz.or(file.target_hz).unwrap_or(base.pitch_hz);
    let db = args.target_db.or(file.target_db).unwrap_or(base.level_db);
    check_target(cfg, hz, db)?;
    let mut grid = preset.grid_around(SineParams::new(db, hz, 0.0));
    let cells = args.cells.or(file.cells);
    if let Some(n) = args.pitch_cells.or(file.pitch_cells).or(cells) {
        grid.pitch_cells = n;
    }
    if let Some(n) = args.level_cells.or(file.level_cells).or(cells) {
        grid.level_cells = n;
    }
    if let Some(p) = args.phase.or(file.phase) {
        grid.phase = p.into();
    }
    grid.validate()?;
    Ok(grid)
}

pub fn heatmap_cmd(args: HeatmapArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let res = Resolved::new(&args.common, &file)?;
    let specs = landscape_specs(&args.grid.specs, &file)?;
    let grid = resolve_grid(&args.grid, &file, Preset::Fig3, &res.bench)?;
    let distances = compile(&specs, &res.bench)?;

    let mut dir = RunDir::create(res.out.as_deref())?;
    for d in &distances {
        let map = with_workers(res.workers, || heatmap(d, &grid))??;
        let (row, col) = map.argmin();
        output::print(&format!(
            "{}: minimum at cell ({row},{col}) = {:.1} Hz, {:.2} dB; target cell(s) {:?}\n",
            d.name(),
            grid.pitch_at(col),
            grid.level_at(row),
            grid.target_cells()
        ))?;
        let name = format!("heatmap_{}.{}", d.name(), res.format.ext());
        match res.format {
            Format::Csv => dir.write(&name, |w| write_heatmap_csv(w, &map))?,
            Format::Json => dir.write_json(&name, &json!({ "grid": grid, "values": map.values }))?,
        }
    }
    let options = json!({ "grid": grid, "format": res.format });
    dir.finish("heatmap", &res.bench, &specs, options)?;
    Ok(())
}

pub fn field(args: FieldArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let res = Resolved::new(&args.common, &file)?;
    let specs = landscape_specs(&args.grid.specs, &file)?;
    let grid = resolve_grid(&args.grid, &file, Preset::Fig4, &res.bench)?;
    let mode = match args.mode.or(file.mode).unwrap_or(FieldModeArg::Numeric) {
        FieldModeArg::Analytic => FieldMode::Analytic,
        FieldModeArg::Numeric => {
            let FieldMode::Numeric { eps_cents, eps_db } = FieldMode::at_resolution(&grid) else {
                unreachable!()
            };
            FieldMode::Numeric {
                eps_cents: args.eps_cents.or(file.eps_cents).unwrap_or(eps_cents),
                eps_db: args.eps_db.or(file.eps_db).unwrap_or(eps_db),
            }
        }
    };
    let distances = compile(&specs, &res.bench)?;

    let mut dir = RunDir::create(res.out.as_deref())?;
    for d in &distances {
        let cells = with_workers(res.workers, || gradient_field(d, &grid, mode))??;
        let name = format!("field_{}.{}", d.name(), res.format.ext());
        match res.format {
            Format::Csv => dir.write(&name, |w| write_field_csv(w, &cells))?,
            Format::Json => dir.write_json(&name, &json!({ "grid": grid, "cells": cells }))?,
        }
    }
    let options = json!({ "grid": grid, "mode": mode, "format": res.format });
    dir.finish("field", &res.bench, &specs, options)?;
    Ok(())
}
