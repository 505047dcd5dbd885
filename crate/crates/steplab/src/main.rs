use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use steplab::harness;

/// Step-size adaptation laboratory for (1+1) evolution strategies.
#[derive(Parser)]
#[command(name = "steplab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment config; resumes if partially complete.
    Run {
        /// TOML experiment configuration.
        config: PathBuf,
        /// Worker threads for concurrent cells.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Build the Glicko-2 ranking table for one dimension.
    Rank {
        /// Directory of run record files.
        records_dir: PathBuf,
        /// Dimension to rank.
        #[arg(long)]
        dim: usize,
        /// Tournament rounds.
        #[arg(long, default_value_t = 25)]
        rounds: usize,
        /// Tournament sampling seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Export the CSV/SVG report from run records.
    Report {
        /// Directory of run record files.
        records_dir: PathBuf,
        /// Output directory for the report files.
        #[arg(long)]
        out: PathBuf,
        /// Tournament rounds for the embedded rankings.
        #[arg(long, default_value_t = 25)]
        rounds: usize,
        /// Tournament sampling seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Pretty-print an advisor transcript file.
    Replay {
        /// Transcript file written during a run.
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, jobs } => match harness::cmd_run(&config, jobs) {
            Ok(report) => {
                println!(
                    "{} cells run, {} already complete",
                    report.completed, report.skipped
                );
                if report.failed.is_empty() {
                    ExitCode::SUCCESS
                } else {
                    eprintln!("{} cells failed:", report.failed.len());
                    for (cell, message) in &report.failed {
                        eprintln!("  {cell}: {message}");
                    }
                    ExitCode::from(2)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Rank {
            records_dir,
            dim,
            rounds,
            seed,
        } => match harness::cmd_rank(&records_dir, dim, rounds, seed) {
            Ok(rows) => {
                println!("method,rating,deviation,volatility,games,wins,draws,losses");
                for r in rows {
                    println!(
                        "{},{:.0},{:.1},{:.4},{},{},{},{}",
                        r.method, r.rating, r.deviation, r.volatility, r.games, r.wins, r.draws,
                        r.losses
                    );
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Report {
            records_dir,
            out,
            rounds,
            seed,
        } => match harness::cmd_report(&records_dir, &out, rounds, seed) {
            Ok(manifest) => {
                for path in manifest {
                    println!("wrote {}", path.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Replay { file } => match harness::cmd_replay(&file) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
