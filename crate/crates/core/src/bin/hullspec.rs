use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hullspec::experiment::{run_file, RunOptions, SCENARIOS};

/// Run a hullspec scenario from a TOML config.
///
/// Exit codes: 0 pass, 1 error, 2 fail, 3 inconclusive.
#[derive(Parser, Debug)]
#[command(name = "hullspec", version)]
struct Cli {
    /// Scenario to run.
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(SCENARIOS))]
    scenario: String,
    /// Scenario configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: output_dir from the config, else hullspec-out/<scenario>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { out_dir: cli.out, threads: cli.threads, svg: cli.svg, tolerances: None };
    match run_file(&cli.scenario, &cli.config, &opts) {
        Ok(outcome) => {
            for m in &outcome.messages {
                println!("{m}");
            }
            println!("{}: {:?} ({})", outcome.scenario, outcome.status, outcome.out_dir.display());
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
