use serde::Serialize;

use pitchgrad::distance::{builtin, builtin_registry, Analyzer, DistanceSpec};

use crate::args::{Format, ListArgs};
use crate::failure::Failure;
use crate::output;

#[derive(Serialize)]
struct Entry {
    name: String,
    label: String,
    description: String,
    norm: &'static str,
    analyzer: Analyzer,
}

pub fn run(args: ListArgs) -> Result<(), Failure> {
    let registry = builtin_registry();
    match args.format {
        Format::Csv => {
            let text: String =
                registry.iter().map(|s| format!("{:<22} {}\n", s.name, s.describe())).collect();
            output::print(&text)?;
        }
        Format::Json => {
            let entries: Vec<Entry> = registry
                .into_iter()
                .map(|s| Entry {
                    description: s.describe(),
                    norm: s.norm.name(),
                    name: s.name,
                    label: s.label,
                    analyzer: s.analyzer,
                })
                .collect();
            output::print(&(serde_json::to_string_pretty(&entries)? + "\n"))?;
        }
    }
    Ok(())
}

/// Builtin specs by name; `all` expands to the whole registry. Duplicates
/// are dropped.
pub fn resolve(names: &[String]) -> Result<Vec<DistanceSpec>, Failure> {
    let mut out: Vec<DistanceSpec> = Vec::new();
    for name in names {
        let specs = if name == "all" { builtin_registry() } else { vec![builtin(name)?] };
        for s in specs {
            if !out.iter().any(|o| o.name == s.name) {
                out.push(s);
            }
        }
    }
    Ok(out)
}
