use std::process::ExitCode;

use clap::Parser;
use convertbw_cli::{command_name, configure_threads, run, Cli, SCHEMA};
use serde_json::json;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli);
    let result = configure_threads().and_then(|()| run(&cli));
    match result {
        Ok(outcome) => {
            if cli.json {
                let mut doc = outcome.json;
                doc["schema"] = json!(SCHEMA);
                doc["command"] = json!(name);
                doc["status"] = json!(outcome.status.exit_code());
                println!("{doc}");
            } else {
                print!("{}", outcome.human);
            }
            ExitCode::from(outcome.status.exit_code())
        }
        Err(e) => {
            if cli.json {
                println!(
                    "{}",
                    json!({"schema": SCHEMA, "command": name, "status": e.exit_code(), "error": e.to_string()})
                );
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
