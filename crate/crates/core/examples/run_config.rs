//! Runs a TOML config through the same pipeline as the binary and prints the
//! JSON report.
//!
//! Run with `cargo run --example run_config -- configs/cobb_douglas.toml`.

use std::path::PathBuf;
use std::process::ExitCode;

use consumer_sensitivity::cli::{run_config, ProblemConfig};

fn main() -> ExitCode {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/worked_example.toml"));
    let outcome = std::fs::read_to_string(&path)
        .map_err(|e| e.to_string())
        .and_then(|text| ProblemConfig::from_toml(&text).map_err(|e| e.to_string()))
        .and_then(|config| run_config(&config, config.seed).map_err(|e| e.to_string()))
        .map(|out| out.report.to_json());
    match outcome {
        Ok(json) => {
            println!("{json}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            ExitCode::FAILURE
        }
    }
}
