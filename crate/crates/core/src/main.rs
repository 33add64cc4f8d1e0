use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use lev::driver::{self, Mode, RunConfig};
use lev::vcgen::solver::{SolverClient, DEFAULT_COMMAND, SOLVER_ENV};

#[derive(Parser)]
#[command(name = "lev", version, about = "Static verifier for Lite-Eiffel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify source files, or emit intermediate code for them.
    Verify {
        /// Source files; a directory stands for all `.le` files inside it.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Reason about calls with the static type's contract only.
        #[arg(long)]
        static_only: bool,
        /// Solver command line reading SMT-LIB2 from standard input.
        #[arg(long, env = SOLVER_ENV, default_value = DEFAULT_COMMAND)]
        solver: String,
        /// Per-obligation timeout in seconds.
        #[arg(long, default_value_t = 10)]
        timeout: u64,
        /// Write the IVL program of each file to DIR instead of verifying.
        #[arg(long, value_name = "DIR", conflicts_with = "emit_smt")]
        emit_boogie: Option<PathBuf>,
        /// Write one SMT-LIB2 script per obligation to DIR instead of verifying.
        #[arg(long, value_name = "DIR")]
        emit_smt: Option<PathBuf>,
        /// Write a per-file CSV summary.
        #[arg(long, value_name = "CSV")]
        report: Option<PathBuf>,
        /// Worker threads (0: one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

fn main() -> ExitCode {
    let Command::Verify { files, static_only, solver, timeout, emit_boogie, emit_smt, report, jobs } =
        Cli::parse().command;
    let mut inputs = Vec::new();
    for f in files {
        if f.is_dir() {
            match driver::corpus_files(&f) {
                Ok(fs) => inputs.extend(fs),
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(3);
                }
            }
        } else {
            inputs.push(f);
        }
    }
    let (mode, output_dir) = match (emit_boogie, emit_smt) {
        (Some(d), _) => (Mode::EmitBoogie, Some(d)),
        (_, Some(d)) => (Mode::EmitSmt, Some(d)),
        _ => (Mode::Verify, None),
    };
    let cfg = RunConfig {
        inputs,
        mode,
        static_only,
        solver: SolverClient::new(solver, Duration::from_secs(timeout)),
        output_dir,
        jobs,
    };
    let result = driver::run(&cfg);
    print!("{}", result.render());
    if let Some(path) = report {
        if let Err(e) = result.write_csv(&path) {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(3);
        }
    }
    ExitCode::from(result.exit_code() as u8)
}
