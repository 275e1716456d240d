use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use consumer_sensitivity::cli::{run, RunOptions, EXIT_USAGE};

/// Run the analyses described in a TOML config and write a JSON report.
#[derive(Debug, Parser)]
#[command(name = "consumer-sensitivity", version)]
struct Args {
    /// Problem config (TOML).
    config: PathBuf,
    /// Directory for the report and series files.
    #[arg(short, long, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the seed given in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Repeat for more progress output on stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Suppress the summary on stdout.
    #[arg(short, long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let opts = RunOptions { out_dir: args.out_dir, seed_override: args.seed, verbose: args.verbose };
    match run(&args.config, &opts) {
        Ok((path, output)) => {
            if !args.quiet {
                print!("{}", output.report.summary());
                println!("report written to {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
