use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

mod args;
mod commands;

use args::Cli;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if !err.use_stderr() {
                // --help / --version
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let _ = err.print();
            report_error("usage", &err.kind().to_string());
            return ExitCode::from(EXIT_USAGE);
        }
    };

    if let Err(err) = configure_threads() {
        report_error("usage", &err);
        return ExitCode::from(EXIT_USAGE);
    }

    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(err) => {
            report_error(err.kind, &err.message);
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// `SUBGAUSS_THREADS` caps the rayon pool.
fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("SUBGAUSS_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("SUBGAUSS_THREADS must be a positive integer, got `{value}`"))?;
    if threads == 0 {
        return Err("SUBGAUSS_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn report_error(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
}
