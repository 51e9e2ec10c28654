//! Config-driven runner for the wavezar experiments.

pub mod artifacts;
pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub use artifacts::ArtifactSet;
pub use commands::{run, Command};
pub use config::ExperimentConfig;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "WAVEZAR_THREADS";

/// Sizes the global thread pool from `WAVEZAR_THREADS`, if set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
        if n == 0 {
            anyhow::bail!("{THREADS_ENV} must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    Ok(())
}

/// Loads the config, applies overrides, runs and commits the artifacts.
pub fn execute(command: Command, config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<(Vec<PathBuf>, String)> {
    let started = artifacts::unix_now();
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.analysis.seed = seed;
    }
    if let Some(out) = out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    let (set, summary) = run(command, &cfg)?;
    let paths = set.commit(Path::new(&cfg.output.dir), command.name(), cfg.analysis.seed, started)?;
    Ok((paths, summary))
}
