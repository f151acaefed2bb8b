//! Parses an in-memory config, runs it and prints the checks and summary.

use genalpha::config::parse_config;
use genalpha::experiment::run_experiment;

const CONFIG: &str = "
[experiment]
kind = nonconservative-compare

[integrator]
rho_inf = 0.5
dt = 0.002
n_steps = 25

[spatial]
n_elements = 16
";

fn main() -> genalpha::error::Result<()> {
    let config = parse_config(CONFIG)?;
    let outcome = run_experiment(&config)?;
    for c in &outcome.checks {
        println!("{}", c.describe());
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&outcome.summary_json()).expect("serializable")
    );
    Ok(())
}
