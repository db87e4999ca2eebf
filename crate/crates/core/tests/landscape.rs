use pitchgrad::distance::{builtin, Distance};
use pitchgrad::landscape::{
    distance_curve, gradient_field, heatmap, write_field_csv, write_heatmap_csv, FieldMode,
    GridSpec, PhasePolicy, Preset, CURVE_TARGETS_HZ,
};
use pitchgrad::signal::{cents_between, BenchConfig};

fn compile(name: &str) -> Distance {
    Distance::new(builtin(name).unwrap(), &BenchConfig::default().with_seed(7)).unwrap()
}

fn small_grid(cells: usize) -> GridSpec {
    GridSpec { pitch_cells: cells, level_cells: cells, ..GridSpec::default() }
}

#[test]
fn ideal_heatmap_bottoms_out_at_target() {
    let grid = Preset::parse("fig3").unwrap().grid();
    let map = heatmap(&compile("ideal"), &grid).unwrap();
    assert_eq!(map.values.len(), 6400);
    assert!(grid.target_cells().contains(&map.argmin()));

    let mut csv = Vec::new();
    write_heatmap_csv(&mut csv, &map).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 6401);
}

#[test]
fn ideal_heatmap_is_v_shaped_in_cents() {
    let grid = small_grid(12);
    let map = heatmap(&compile("ideal"), &grid).unwrap();
    let target = grid.target.pitch_hz;
    for row in 0..grid.level_cells {
        for col in 1..grid.pitch_cells {
            let (a, b) = (map.get(row, col - 1), map.get(row, col));
            if grid.pitch_at(col) <= target {
                assert!(b < a);
            } else if grid.pitch_at(col - 1) >= target {
                assert!(b > a);
            }
        }
    }
}

#[test]
fn ideal_curve_is_linear_in_cents() {
    let d = compile("ideal");
    let pts = distance_curve(&d, &[346.0], -12.5, 50, PhasePolicy::Random).unwrap();
    let range = d.config().pitch_range_cents();
    for p in &pts {
        let expect = cents_between(346.0, p.pred_hz).abs() / range;
        assert!((p.distance - expect).abs() < 1e-12);
    }
}

#[test]
fn spectrogram_curves_bottom_out_nearest_the_target() {
    let pts = distance_curve(&compile("spectrogram"), &CURVE_TARGETS_HZ, -12.5, 200, PhasePolicy::Random)
        .unwrap();
    for (t, curve) in pts.chunks(200).enumerate() {
        let target = CURVE_TARGETS_HZ[t];
        let nearest = curve
            .iter()
            .min_by(|a, b| cents_between(target, a.pred_hz).abs().total_cmp(&cents_between(target, b.pred_hz).abs()))
            .unwrap();
        let lowest = curve.iter().min_by(|a, b| a.distance.total_cmp(&b.distance)).unwrap();
        assert_eq!(lowest.pred_hz, nearest.pred_hz, "target {target}");
    }
}

#[test]
fn spectral_heatmaps_bottom_out_at_target_on_a_zoomed_grid() {
    let grid = GridSpec::zoomed(GridSpec::default().target, 10, 50.0, 1.0).with_phase(PhasePolicy::Zero);
    assert_eq!(grid.target_cells(), vec![(5, 5)]);
    for name in ["spectrogram", "log_spectrogram", "mel", "mss", "log_mss"] {
        let map = heatmap(&compile(name), &grid).unwrap();
        assert!(grid.target_cells().contains(&map.argmin()), "{name}: {:?}", map.argmin());
        assert!(map.values.iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn centroid_field_has_no_level_component() {
    let field = gradient_field(&compile("log_spectral_centroid"), &small_grid(6), FieldMode::Analytic).unwrap();
    for c in &field {
        assert!(c.d_dlevel_per_db.abs() <= 1e-9, "{c:?}");
    }
}

#[test]
fn ideal_field_points_away_from_target() {
    let grid = small_grid(8);
    let field = gradient_field(&compile("ideal"), &grid, FieldMode::Analytic).unwrap();
    for c in &field {
        let side = cents_between(grid.target.pitch_hz, c.prediction.pitch_hz).signum();
        assert_eq!(c.d_dpitch_per_cent.signum(), side);
    }
}

#[test]
fn mss_numeric_field_points_toward_target_at_fig4_resolution() {
    let grid = Preset::parse("fig4").unwrap().grid();
    let field = gradient_field(&compile("mss"), &grid, FieldMode::at_resolution(&grid)).unwrap();
    let target = grid.target.pitch_hz;
    let good = field
        .iter()
        .filter(|c| c.d_dpitch_per_cent * cents_between(target, c.prediction.pitch_hz) > 0.0)
        .count();
    assert!(good as f64 / field.len() as f64 >= 0.9, "{good}/{}", field.len());
}

#[test]
fn numeric_field_converges_to_analytic() {
    // ℓ1 distances have |·| kinks closer than any usable step; only ℓ2 ones converge cellwise
    let grid = small_grid(4);
    for name in ["log_spectrogram", "log_mss"] {
        let d = compile(name);
        let analytic = gradient_field(&d, &grid, FieldMode::Analytic).unwrap();
        let numeric = gradient_field(&d, &grid, FieldMode::Numeric { eps_cents: 1e-5, eps_db: 1e-5 }).unwrap();
        for (a, n) in analytic.iter().zip(&numeric) {
            for (x, y) in [(a.d_dpitch_per_cent, n.d_dpitch_per_cent), (a.d_dlevel_per_db, n.d_dlevel_per_db)] {
                if x.abs() > 1e-6 {
                    assert!((x - y).abs() <= 1e-3 * x.abs(), "{name} ({}, {}): {x} vs {y}", a.row, a.col);
                }
            }
        }
    }
}

#[test]
fn exports_are_byte_identical_on_rerun() {
    let grid = small_grid(5);
    let d = compile("mel");
    let emit = || {
        let mut out = Vec::new();
        write_field_csv(&mut out, &gradient_field(&d, &grid, FieldMode::at_resolution(&grid)).unwrap()).unwrap();
        write_heatmap_csv(&mut out, &heatmap(&d, &grid).unwrap()).unwrap();
        out
    };
    assert_eq!(emit(), emit());
}

#[test]
fn presets() {
    let t = Preset::parse("fig3-supp2").unwrap().target();
    assert_eq!((t.pitch_hz, t.level_db), (922.0, -17.5));
    let t = Preset::parse("fig3-supp1").unwrap().target();
    assert_eq!((t.pitch_hz, t.level_db), (130.0, -7.5));
    let g = Preset::parse("fig3").unwrap().grid();
    assert!((g.cents_per_cell() - 105.9).abs() < 0.05 && (g.db_per_cell() - 0.3125).abs() < 1e-12);
    let z = Preset::parse("fig4").unwrap().grid();
    assert!((z.cents_per_cell() - 340.0).abs() < 1e-9 && (z.db_per_cell() - 1.0).abs() < 1e-12);
    assert!(Preset::parse("fig9").is_err());
}
