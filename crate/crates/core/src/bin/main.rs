use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use conic_geodesic::experiment::{run_command, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Solve,
    Sweep,
    Audit,
    Oracle,
    Lemmas,
}

/// Regularized geodesics between conical Kähler potentials on the sphere.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for grids, reports and series.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Halve both grid spacings this many times.
    #[arg(long, default_value_t = 0)]
    refine: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::Sweep => Command::Sweep,
        Cmd::Audit => Command::Audit,
        Cmd::Oracle => Command::Oracle,
        Cmd::Lemmas => Command::Lemmas,
    };
    match run_command(cmd, &cli.config, &cli.out, cli.refine) {
        Ok(rep) => {
            for line in &rep.lines {
                println!("{line}");
            }
            if rep.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
