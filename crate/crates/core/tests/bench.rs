use pitchgrad::bench::{run_suite, write_reports_csv, Condition, SuiteOptions, SuiteResult};
use pitchgrad::distance::{builtin, Distance};
use pitchgrad::signal::{Axis, BenchConfig};

fn distances(names: &[&str], cfg: &BenchConfig) -> Vec<Distance> {
    names.iter().map(|n| Distance::new(builtin(n).unwrap(), cfg).unwrap()).collect()
}

fn run(names: &[&str], conditions: &[Condition], n_trials: usize, workers: usize, cfg: &BenchConfig) -> SuiteResult {
    let opts = SuiteOptions { n_trials, workers, ..SuiteOptions::default() };
    run_suite(&distances(names, cfg), conditions, &opts, cfg).unwrap()
}

fn csv(r: &SuiteResult) -> Vec<u8> {
    let mut out = Vec::new();
    write_reports_csv(&mut out, &r.reports).unwrap();
    out
}

#[test]
fn worker_count_does_not_change_results() {
    let cfg = BenchConfig::default().with_seed(7);
    let cols = Condition::table_columns();
    let names = ["spectrogram", "log_spectral_centroid", "ideal"];
    let base = run(&names, &cols, 24, 1, &cfg);
    for workers in [4, 16] {
        let other = run(&names, &cols, 24, workers, &cfg);
        assert_eq!(csv(&base), csv(&other), "workers={workers}");
        assert_eq!(format!("{:?}", base.records), format!("{:?}", other.records));
    }
}

#[test]
fn ideal_is_always_right() {
    let cfg = BenchConfig::default().with_seed(7);
    let r = run(&["ideal"], &Condition::table_columns(), 1000, 0, &cfg);
    for rep in &r.reports {
        assert_eq!(rep.accuracy, 1.0, "{}", rep.condition);
        assert_eq!(rep.n_errors, 0);
    }
}

#[test]
fn vanishing_perturbation_approaches_the_analytic_sign() {
    let cfg = BenchConfig::default().with_seed(3);
    let names = ["spectrogram", "mel", "mss", "log_spectral_centroid"];
    for (axis, eps) in [(Axis::Pitch, 1e-4), (Axis::Level, 1e-5)] {
        let r = run(&names, &[Condition::analytic(axis), Condition::numeric(axis, eps)], 60, 0, &cfg);
        for (s, name) in names.iter().enumerate() {
            let (analytic, numeric) = (&r.records[2 * s], &r.records[2 * s + 1]);
            let agree = analytic
                .iter()
                .zip(numeric)
                .filter(|(a, n)| {
                    let (a, n) = (a.as_ref().unwrap(), n.as_ref().unwrap());
                    // derivatives at rounding level (centroid vs level) carry no sign
                    a.d_pert_or_derivative.abs() <= 1e-9 || a.correct == n.correct
                })
                .count();
            assert!(agree >= 58, "{name} {axis:?}: {agree}/60");
        }
    }
}

#[test]
fn role_swap_exchanges_target_and_prediction() {
    let cfg = BenchConfig::default().with_seed(11);
    let cond = [Condition::coarse(Axis::Level)];
    let plain = run(&["ideal"], &cond, 10, 1, &cfg);
    let opts = SuiteOptions { n_trials: 10, workers: 1, swap_roles: true, ..SuiteOptions::default() };
    let swapped = run_suite(&distances(&["ideal"], &cfg), &cond, &opts, &cfg).unwrap();
    for (a, b) in plain.records[0].iter().zip(&swapped.records[0]) {
        let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
        assert_eq!((a.target, a.prediction), (b.prediction, b.target));
    }
}

#[test]
fn report_csv_layout() {
    let cfg = BenchConfig::default().with_seed(1);
    let r = run(&["ideal"], &[Condition::fine(Axis::Pitch)], 5, 1, &cfg);
    let text = String::from_utf8(csv(&r)).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("spec,axis,mode,eps,n,accuracy,ci95"));
    assert!(lines.next().unwrap().starts_with("ideal,pitch,numeric,30,5,1.000000,0.000000"));
}
