use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use mtscreen::cli::{Cli, CliError};

fn run(cli: &Cli) -> anyhow::Result<()> {
    cli.run().with_context(|| format!("{} failed", cli.command.name()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // the inner error already renders its own cause
            match e.downcast_ref::<CliError>() {
                Some(inner) => {
                    eprintln!("error: {e}: {inner}");
                    ExitCode::from(inner.exit_code())
                }
                None => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
