use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use meanspin::cli::{execute, Command};
use meanspin::config::parse_config;

#[derive(Parser)]
#[command(version, about = "Mean-spin dynamics: verification suites and simulations")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// key=value configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides run.seed)
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(dir) = args.out {
        cfg.out_dir = dir;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    match execute(args.command, &cfg) {
        Ok(rep) => {
            print!("{}", rep.render());
            ExitCode::from(if rep.pass() { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
