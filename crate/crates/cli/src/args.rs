use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "laqw", version, about = "Quantum-walk simulation, key generation and randomness testing")]
pub struct Cli {
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for report files; created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Print nothing on stdout and log errors only.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact position distribution of one walk.
    Simulate { config: PathBuf },
    /// Full key-generation pipeline.
    Keygen { config: PathBuf },
    /// Six SP 800-22 tests on an ASCII 0/1 file.
    Nist {
        bits: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        significance: f64,
    },
    /// Hellinger sensitivity of exact distributions.
    Sensitivity { config: PathBuf },
    /// Circuit depths over step counts; built-in defaults without a config.
    Depth { config: Option<PathBuf> },
    /// Pairwise Hamming distances over repeated pipeline trials.
    Reproduce { config: PathBuf },
    /// Reproducibility over a grid of noise settings.
    Noise { config: PathBuf },
}
