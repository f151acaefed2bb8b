use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use genalpha::config::load_config;
use genalpha::experiment::{exit_code, run_experiment};

#[derive(Parser)]
#[command(
    name = "genalpha",
    version,
    about = "Generalized-alpha time integration experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config value (default `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Parse and check a config file without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Validate { config } => match load_config(&config) {
            Ok(c) => {
                println!("ok: {} ({})", config.display(), c.kind.name());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Run { config, out, quiet } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let result = run_experiment(&cfg);
            let outcome = match &result {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let dir = out
                .or_else(|| cfg.output.directory.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            if let Err(e) = outcome.write(&dir, cfg.output.csv) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if !quiet {
                println!("experiment {}", cfg.kind.name());
                for c in &outcome.checks {
                    println!("{}", c.describe());
                }
                println!("outputs written to {}", dir.display());
            }
            ExitCode::from(exit_code(&result) as u8)
        }
    }
}
