mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use output::OutputDir;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters outside an operation's preconditions (exit 2).
    Usage(String),
    /// Failure while running (exit 1).
    Run(String),
}

impl From<biharm::Error> for CliError {
    fn from(e: biharm::Error) -> Self {
        use biharm::Error::*;
        match e {
            InvalidParameter(_) | IncompatibleData(_) | Parse(_) | GridTooCoarse { .. } | SeedTooLarge { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Run(other.to_string()),
        }
    }
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    let cmd = &cli.command;
    let mut out = OutputDir::create(cmd.common().out.clone())?;
    let config = cmd.config_value();
    out.write("run.cfg", &config::render(&config))?;
    let pass = match cmd {
        Command::ReduceCheck(c) => commands::reduce_check(c, &mut out),
        Command::Orbit(c) => commands::orbit(c, &mut out),
        Command::ClassifySweep(c) => commands::classify_sweep(c, &mut out),
        Command::Certify(c) => commands::certify(c, &mut out),
        Command::Map(c) => commands::map(c, &mut out),
        Command::Energy(c) => commands::energy(c, &mut out),
        Command::Flow(c) => commands::flow(c, &mut out),
        Command::KEstimate(c) => commands::k_estimate(c, &mut out),
    }?;
    let code = if pass { 0 } else { 1 };
    out.finish(cmd.name(), config, code)?;
    Ok(code)
}

fn main() -> ExitCode {
    let argv = match config::merge(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(CliError::Usage(m) | CliError::Run(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
