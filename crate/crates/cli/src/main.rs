use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use opalg_cli::builtins::list_builtins;
use opalg_cli::scenario::env_seed;
use opalg_cli::{run_file, run_parallel, verify_all, write_report, CliResult, Flags, Report, Status};

#[derive(Parser)]
#[command(
    name = "opalg",
    version,
    about = "Scenario runner for the operator algebra workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files and emit one report per scenario.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List builtin suites.
    List,
    /// Run every builtin instance.
    VerifyAll {
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args)]
struct RunOpts {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_norm: Option<f64>,
    #[arg(long)]
    tol_structural: Option<f64>,
    /// Amplification level cap for envelope searches.
    #[arg(long)]
    levels: Option<usize>,
    /// Fock cutoff override.
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long)]
    emit_matrices: bool,
    /// Directory for report files; reports go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunOpts {
    fn flags(&self) -> Flags {
        Flags {
            seed: self.seed,
            tol_norm: self.tol_norm,
            tol_structural: self.tol_structural,
            levels: self.levels,
            cutoff: self.cutoff,
            emit_matrices: self.emit_matrices,
        }
    }
}

fn emit(reports: &[Report], out: Option<&PathBuf>) -> CliResult<()> {
    for r in reports {
        match out {
            Some(dir) => {
                let path = write_report(dir, r)?;
                eprintln!("{:<20} {:<8} {}", r.scenario, status_word(r.status), path.display());
            }
            None => print!("{}", r.to_json()),
        }
    }
    Ok(())
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Flagged => "flagged",
    }
}

fn execute(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::List => {
            for b in list_builtins() {
                println!("{:<18} {}", b.name, b.summary);
            }
            Ok(true)
        }
        Command::Run { scenarios, opts } => {
            let seed = env_seed()?;
            let flags = opts.flags();
            let reports = run_parallel(&scenarios, opts.parallel, |p| run_file(p, seed, &flags))
                .into_iter()
                .collect::<CliResult<Vec<_>>>()?;
            emit(&reports, opts.out.as_ref())?;
            Ok(reports.iter().all(|r| r.status != Status::Fail))
        }
        Command::VerifyAll { opts } => {
            let reports = verify_all(env_seed()?, &opts.flags(), opts.parallel)?;
            emit(&reports, opts.out.as_ref())?;
            for r in &reports {
                for c in r.failed_checks() {
                    eprintln!("{}: check {} failed ({} vs {})", r.scenario, c.name, c.value, c.bound);
                }
            }
            Ok(reports.iter().all(|r| r.status != Status::Fail))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
