use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use pnfc_cli::{run, Command, Config};

/// Projector–nilpotent functional calculus: batch runs from a config file.
#[derive(Parser, Debug)]
#[command(name = "pnfc", version)]
struct Args {
    /// What to run.
    #[arg(value_enum)]
    command: Command,
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized steps (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = Config::load(&args.config, std::env::vars())
        .and_then(|cfg| run(&cfg, args.command, args.out.as_deref(), args.seed));
    match result {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("pnfc {}: {e}", args.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
