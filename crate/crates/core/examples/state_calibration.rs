//! Calibrate the incidence cap of a state-level scenario (reproduction
//! number, deaths per case, price, wage, α and beds) against its death
//! series.
//!
//! cargo run --release --example state_calibration -- [config.toml]

use anyhow::Result;
use netlock::cli::{cmd_calibrate, Context, ScenarioConfig};

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NETLOCK_LOG", "warn")).init();
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/state_b.toml").into()
    });
    let path = std::path::PathBuf::from(path);
    let config = ScenarioConfig::parse(&std::fs::read_to_string(&path)?)?;
    let epi = config.epidemic_params()?;
    println!(
        "beta {:.4}, gamma {:.5}, kappa {:.5}",
        epi.beta, epi.gamma, epi.kappa
    );
    let base = path
        .parent()
        .unwrap_or(std::path::Path::new("."))
        .to_path_buf();
    let ctx = Context::new(
        config,
        base,
        std::env::temp_dir().join("netlock_state_calibration"),
    );
    let outcome = cmd_calibrate(&ctx, None)?;
    outcome.messages.iter().for_each(|m| println!("{m}"));
    Ok(())
}
