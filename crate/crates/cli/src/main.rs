//! `nframes run <file>`: moving frames, invariants and structured Noether laws
//! for a problem file.

use clap::{Parser, Subcommand};
use nframes_cli::{run, CliError, Format, Options, ProblemFile, Task};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nframes", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Runs the tasks of a problem file and prints a report.
    Run {
        file: PathBuf,
        /// Comma separated tasks, replacing the list in the file.
        #[arg(long)]
        tasks: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Seed for sampled verifications.
        #[arg(long, default_value_t = nframes_core::sample::DEFAULT_SEED)]
        seed: u64,
        /// Largest jet order accepted by `invariants N`.
        #[arg(long, default_value_t = 4)]
        max_order: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Cmd::Run {
        file,
        tasks,
        format,
        seed,
        max_order,
    } = cli.cmd;
    let go = || -> Result<nframes_cli::Report, CliError> {
        let pf = ProblemFile::read(&file)?;
        let tasks = match tasks {
            Some(t) => {
                let items: Vec<&str> = t.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                Some(Task::parse_list(&items)?)
            }
            None => None,
        };
        run(&pf, &Options { seed, max_order, tasks })
    };
    match go() {
        Ok(report) => {
            print!("{}", report.emit(format));
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("nframes: {e}");
            ExitCode::from(2)
        }
    }
}
