use std::process::ExitCode;

use clap::Parser;
use rdr_cli::commands::{run, Cli};
use rdr_cli::ErrorRecord;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = ErrorRecord::from_error(&e);
            eprintln!("{}", serde_json::to_string(&record).unwrap_or_else(|_| format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
