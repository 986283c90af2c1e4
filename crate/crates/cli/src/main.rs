use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use loctraj_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(outcome.stdout.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.exit_code)
        }
        Err(err) => {
            eprintln!("tl: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
