mod args;
mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use log::{error, LevelFilter};

use args::{Cli, Command};
use error::CliResult;

fn run(cli: &Cli) -> CliResult<()> {
    let outcome = match &cli.command {
        Command::Simulate { config } => commands::simulate(config)?,
        Command::Keygen { config } => commands::keygen(config, cli.seed)?,
        Command::Nist { bits, significance } => commands::nist(bits, *significance)?,
        Command::Sensitivity { config } => commands::sensitivity(config, cli.seed)?,
        Command::Depth { config } => commands::depth(config.as_deref())?,
        Command::Reproduce { config } => commands::reproduce(config, cli.seed)?,
        Command::Noise { config } => commands::noise(config, cli.seed)?,
    };
    if let Some(dir) = &cli.out {
        outcome.files.write(dir)?;
    }
    if !cli.quiet {
        let mut stdout = std::io::stdout().lock();
        // A closed pipe is not an error for a batch tool.
        let _ = stdout.write_all(outcome.render(cli.format).as_bytes());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.quiet { LevelFilter::Error } else { LevelFilter::Warn })
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
