//! Scenario runner for the opalg workbench: JSON scenarios in, JSON reports out.

pub mod builtins;
pub mod error;
pub mod exec;
pub mod payload;
pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::Value;

pub use error::{CliError, CliResult};
pub use report::{Report, Status};
pub use scenario::{Flags, Scenario, Settings};

/// Loads and runs one scenario file with `env_seed` standing in for `OPALG_SEED`.
pub fn run_file(path: &Path, env_seed: Option<u64>, flags: &Flags) -> CliResult<Report> {
    let s = Scenario::load(path)?;
    run_scenario(&s, env_seed, flags)
}

pub fn run_scenario(s: &Scenario, env_seed: Option<u64>, flags: &Flags) -> CliResult<Report> {
    let settings = Settings::resolve(env_seed, &s.tolerances, flags)?;
    exec::execute(s, &settings)
}

/// Runs a builtin by concrete name under default tolerances.
pub fn run_builtin(name: &str, env_seed: Option<u64>, flags: &Flags) -> CliResult<Report> {
    let settings = Settings::resolve(env_seed, &Default::default(), flags)?;
    let b = builtins::run_builtin(name, &settings, &Value::Null)?;
    Ok(b.finish(name, "builtin", &settings.cfg, settings.emit))
}

/// Maps `jobs` over at most `parallel` worker threads, keeping input order.
pub fn run_parallel<T, R>(jobs: &[T], parallel: usize, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R>
where
    T: Sync,
    R: Send,
{
    if parallel <= 1 {
        return jobs.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(parallel).build() {
        Ok(pool) => pool.install(|| jobs.par_iter().map(&f).collect()),
        Err(_) => jobs.iter().map(f).collect(),
    }
}

/// Every builtin instance in registry order.
pub fn verify_all(env_seed: Option<u64>, flags: &Flags, parallel: usize) -> CliResult<Vec<Report>> {
    let names = builtins::verify_all_instances();
    run_parallel(&names, parallel, |name| run_builtin(name, env_seed, flags))
        .into_iter()
        .collect()
}

/// Writes `report` as `<dir>/<scenario>.json`.
pub fn write_report(dir: &Path, report: &Report) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(format!("{}.json", sanitize(&report.scenario)));
    std::fs::write(&path, report.to_json()).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
