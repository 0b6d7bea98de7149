//! Library half of the `midstop` binary: argument types, encoders and the
//! commands, so they can be tested without spawning a process.

pub mod args;
pub mod commands;
pub mod error;
pub mod format;
pub mod manifest;

use std::fs;
use std::path::Path;

pub use args::{Cli, Command};
pub use error::CliError;
pub use manifest::RunManifest;

use commands::Output;

pub fn run_command(command: &Command) -> Result<Output, CliError> {
    match command {
        Command::Policy(a) => commands::policy(a),
        Command::Value(a) => commands::value(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Threshold(a) => commands::threshold(a),
        Command::Check(a) => commands::check(a),
        Command::Table1(_) => commands::table1(),
    }
}

fn out_path(command: &Command) -> Option<&Path> {
    match command {
        Command::Policy(a) => a.output.out.as_deref(),
        Command::Value(a) => a.output.out.as_deref(),
        Command::Simulate(a) => a.out.as_deref(),
        Command::Bounds(a) => a.output.out.as_deref(),
        Command::Threshold(a) => a.output.out.as_deref(),
        Command::Check(a) => a.out.as_deref(),
        Command::Table1(a) => a.out.as_deref(),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Runs the command and sends its text to `--out` (with a manifest) or
/// stdout. Returns the command output so the caller can report notes and
/// violations.
pub fn execute(cli: &Cli, argv: &[String]) -> Result<Output, CliError> {
    let started = manifest::unix_ms();
    let output = run_command(&cli.command)?;
    match out_path(&cli.command) {
        Some(path) => {
            write(path, &output.text)?;
            let manifest = RunManifest {
                command_line: argv.to_vec(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                base_seed: output.seed,
                mode: output.mode,
                workers_used: output.workers_used,
                started_unix_ms: started,
                finished_unix_ms: manifest::unix_ms(),
                outputs: vec![path.to_path_buf()],
            };
            let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            text.push('\n');
            write(&manifest::manifest_path(path), &text)?;
        }
        None => print!("{}", output.text),
    }
    Ok(output)
}
