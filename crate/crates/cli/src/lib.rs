//! `qmlab` command-line runner.
//!
//! Every run produces a [`Report`]: a JSON body, a CSV table and the list of
//! numerical checks that failed. [`render`] wraps the body with the schema
//! tag, the effective configuration and (unless `--reproducible`) a
//! timestamp.

pub mod args;
pub mod commands;
pub mod format;

use serde_json::{json, Map, Value};
use thiserror::Error;

use args::{Cli, Command, Format};
use format::Table;

pub const SCHEMA: &str = "qmlab/1";

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

/// One tolerance check that gates the exit code.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub body: Map<String, Value>,
    pub table: Table,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Validates global flags and dispatches to the subcommand.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    if cli.global.samples > 0 && cli.global.seed.is_none() {
        return Err(CliError::usage("--seed is required when --samples > 0"));
    }
    if cli.global.shards == Some(0) {
        return Err(CliError::usage("--shards must be at least 1"));
    }
    match &cli.command {
        Command::Machine(a) => commands::cmd_machine(&cli.global, a),
        Command::Singlet(a) => commands::cmd_singlet(&cli.global, a),
        Command::Chsh(a) => commands::cmd_chsh(&cli.global, a),
        Command::Paradox(a) => commands::cmd_paradox(&cli.global, a),
        Command::Dynamics(a) => commands::cmd_dynamics(&cli.global, a),
    }
}

/// Serializes a report in the requested format.
pub fn render(cli: &Cli, report: &Report) -> anyhow::Result<String> {
    match cli.global.format {
        Format::Csv => Ok(report.table.to_csv()?),
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("schema".into(), json!(SCHEMA));
            doc.insert("command".into(), json!(cli.command.name()));
            doc.insert("config".into(), serde_json::to_value(cli)?);
            if !cli.global.reproducible {
                doc.insert("timestamp".into(), json!(chrono::Utc::now().to_rfc3339()));
            }
            doc.insert("checks".into(), serde_json::to_value(&report.checks)?);
            for (k, v) in &report.body {
                doc.insert(k.clone(), v.clone());
            }
            Ok(format::to_json(&Value::Object(doc))?)
        }
    }
}
