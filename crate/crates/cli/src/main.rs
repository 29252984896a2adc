use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use qmlab_cli::args::{expand_config, Cli};
use qmlab_cli::{render, run, CliError, EXIT_NUMERICAL, EXIT_USAGE};

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(CliError::Other(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let text = match render(&cli, &report) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let written = match &cli.global.output {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::FAILURE;
    }
    let mut failed = false;
    for c in report.failed_checks() {
        eprintln!("check failed: {} = {:e} exceeds {:e}", c.name, c.value, c.tolerance);
        failed = true;
    }
    if failed {
        ExitCode::from(EXIT_NUMERICAL)
    } else {
        ExitCode::SUCCESS
    }
}
