use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fliess::harness::{bounds_summary, emit_trajectory, reproduce_table, run_config, ExperimentConfig, Table};

/// Chen-Fliess operators and their discrete-time approximations.
#[derive(Parser)]
#[command(name = "fliess", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and print its table row.
    Run { config: PathBuf },
    /// Reproduce a published results table and compare every column.
    Table {
        #[arg(value_parser = ["lc", "gc"])]
        which: String,
    },
    /// Print the trajectory CSV (t, y, N, y_hat_J) for a config.
    Trajectory {
        config: PathBuf,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Print all error bounds and regime warnings for a config.
    Bounds { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Run { config } => ExperimentConfig::load(&config).and_then(|cfg| {
            let (report, files) = run_config(&cfg, &mut stdout)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            Ok(())
        }),
        Command::Table { which } => {
            let table: Table = which.parse().expect("validated by clap");
            let report = reproduce_table(table);
            let _ = write!(stdout, "{}", report.render());
            return if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
        Command::Trajectory { config, resolution } => ExperimentConfig::load(&config)
            .and_then(|cfg| emit_trajectory(&cfg, resolution))
            .map(|csv| {
                let _ = stdout.write_all(csv.as_bytes());
            }),
        Command::Bounds { config } => ExperimentConfig::load(&config)
            .and_then(|cfg| bounds_summary(&cfg))
            .map(|s| {
                let _ = stdout.write_all(s.as_bytes());
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
