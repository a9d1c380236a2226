//! Command-line front end: configuration loading, the `params`, `limits`,
//! `evolve` and `sweep` subcommands, and error reporting with one exit code
//! per error class.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "lambsim", version, about = "Flux-switched qubit-resonator simulator")]
pub struct Cli {
    /// Configuration file of `section.key = value` lines.
    #[arg(long, global = true, env = "LAMBSIM_CONFIG")]
    pub config: Option<PathBuf>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for sweeps; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Tabulate the Hamiltonian parameters over the flux range.
    Params,
    /// Parameters and Hamiltonian structure at the two set-points.
    Limits,
    /// Evolve the ground state under the configured drive.
    Evolve,
    /// Sweep the switching frequency around the frequency sum.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Params => "params",
            Command::Limits => "limits",
            Command::Evolve => "evolve",
            Command::Sweep => "sweep",
        }
    }
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

/// Runs one command and returns its summary lines.
pub fn run(cli: &Cli) -> Result<Vec<String>> {
    let start = Instant::now();
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if cli.threads > 0 {
        // only fails if the global pool already exists, which keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let lines = match cli.command {
        Command::Params => commands::params(&cfg, &dir)?,
        Command::Limits => commands::limits(&cfg, &dir)?,
        Command::Evolve => commands::evolve(&cfg, &dir)?,
        Command::Sweep => commands::run_sweep(&cfg, &dir)?,
    };
    let threads = rayon::current_num_threads();
    commands::write_meta(&cfg, &dir, cli.command.name(), threads, start.elapsed().as_secs_f64())?;
    Ok(lines)
}
