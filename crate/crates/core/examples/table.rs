//! Prints the accuracy table for every builtin distance.
//!
//! `cargo run --release -p pitchgrad-core --example table -- [n_trials] [seed]`

use std::time::Instant;

use pitchgrad::bench::{run_suite, write_table_csv, Condition, SuiteOptions};
use pitchgrad::distance::{builtin_registry, Distance};
use pitchgrad::signal::BenchConfig;

fn main() -> pitchgrad::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_trials = args.next().map_or(1000, |s| s.parse().expect("n_trials"));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));
    let cfg = BenchConfig::default().with_seed(seed);
    let distances = builtin_registry()
        .into_iter()
        .map(|s| Distance::new(s, &cfg))
        .collect::<pitchgrad::Result<Vec<_>>>()?;
    let conditions = Condition::table_columns();
    let opts = SuiteOptions { n_trials, workers: 0, ..Default::default() };
    let start = Instant::now();
    let result = run_suite(&distances, &conditions, &opts, &cfg)?;
    write_table_csv(std::io::stdout().lock(), &result.reports, &conditions)?;
    eprintln!("{n_trials} trials in {:.1?}", start.elapsed());
    Ok(())
}
