use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use prevalence_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // usage errors are input errors; exit code 2 is reserved
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.stdout.as_bytes());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(err) => {
            let chain: Vec<String> = err.chain().map(|e| e.to_string()).collect();
            eprintln!("error: {}", chain.join(": "));
            ExitCode::from(1)
        }
    }
}
