use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wavezar_cli::{execute, init_threads, Command};

/// Numerical laboratory for damped semilinear waves with mixed
/// Dirichlet/Neumann boundaries.
#[derive(Debug, Parser)]
#[command(name = "wavezar", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding `analysis.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = init_threads().and_then(|_| execute(args.command, &args.config, args.out.as_deref(), args.seed));
    match result {
        Ok((paths, summary)) => {
            println!("{summary}");
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
