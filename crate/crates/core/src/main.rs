use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use fofh_core::cli::{run, RunConfig};

fn main() -> ExitCode {
    let cfg = match RunConfig::parse().resolve_layers() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    let result = run(&cfg, &mut lock);
    let _ = lock.flush();
    match result {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
