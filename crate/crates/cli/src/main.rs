use std::process::ExitCode;

use clap::Parser;
use couplage_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(report) if report.passed => ExitCode::SUCCESS,
        Ok(report) => {
            let msg = serde_json::json!({
                "status": "fail",
                "command": cli.command.name(),
                "offending": report.offending,
            });
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
