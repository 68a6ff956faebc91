//! Drive the command layer from an in-memory scenario: the same code path as
//! `netlock --config scenario.toml optimize`, followed by the centrality
//! report on the written policy.
//!
//! cargo run --release --example scenario_config -- [out_dir]

use anyhow::Result;
use netlock::cli::{cmd_optimize, cmd_report_centrality, Context, ScenarioConfig};

const SCENARIO: &str = r#"
schema_version = 1

[network]
kind = "small-world"
n = 100
mean_degree = 4
seed = 2

[planner]
lambda = 0.1
horizon = 100.0
dt = 0.25

[solver]
starts = [0.0]
"#;

fn main() -> Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "scenario_out".into());
    let config = ScenarioConfig::parse(SCENARIO)?;
    let ctx = Context::new(config, ".".into(), out_dir.into());
    for outcome in [cmd_optimize(&ctx)?, cmd_report_centrality(&ctx, None)?] {
        outcome.messages.iter().for_each(|m| println!("{m}"));
        for f in &outcome.files {
            println!("  wrote {}", f.display());
        }
    }
    Ok(())
}
