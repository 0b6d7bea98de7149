use std::process::ExitCode;

use clap::Parser;
use midstop_cli::error::{EXIT_USAGE, EXIT_VIOLATION};
use midstop_cli::{execute, Cli};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli, &argv) {
        Ok(output) => {
            if let Some(note) = &output.note {
                eprintln!("{note}");
            }
            match &output.violation {
                Some(v) => {
                    eprintln!("violation in: {v}");
                    ExitCode::from(EXIT_VIOLATION)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
