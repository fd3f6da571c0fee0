use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use coopgame::cli::{run_file, Output, EXIT_OK, EXIT_USAGE};

/// Solve, sweep or simulate a node-vs-network cooperation scenario and
/// write the result as CSV.
#[derive(Debug, Parser)]
#[command(name = "coopgame", version)]
struct Args {
    /// Scenario file (`key = value` lines).
    scenario: PathBuf,
    /// Output path; overrides the scenario's `output` key.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for `sim` scenarios.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(err) => {
            let _ = err.print();
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    match run_file(&args.scenario, args.out.as_deref(), args.seed) {
        Ok(Output::Stdout(csv)) => {
            let _ = std::io::stdout().write_all(csv.as_bytes());
            ExitCode::SUCCESS
        }
        Ok(Output::File(_)) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("coopgame: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
