//! Denser contact networks need more lockdown: small worlds with k·n edges
//! for k = 2..5 at a tight incidence cap.
//!
//! cargo run --release --example density_sweep -- [n] [seed] [max_seconds]

use anyhow::Result;
use netlock::control::{solve_optimal_lockdown, PlannerProblem, SolverConfig};
use netlock::economy::{AgentEconomy, DiscountRate, Economy};
use netlock::epidemic::{EpidemicParams, HealthState, TimeGrid};
use netlock::netgen::{density, generate_small_world, RngSeed};

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NETLOCK_LOG", "warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(300), |s| s.parse())?;
    let seed: u64 = args.get(1).map_or(Ok(1), |s| s.parse())?;
    let max_seconds: f64 = args.get(2).map_or(Ok(45.0), |s| s.parse())?;
    let config = SolverConfig {
        max_seconds: Some(max_seconds),
        ..SolverConfig::default().single_start()
    };
    for k in 2..=5 {
        let net = generate_small_world(n, 2 * k, 0.1, RngSeed(seed))?;
        let d = density(&net)?;
        let problem = PlannerProblem {
            epi: EpidemicParams::baseline(),
            econ: Economy::homogeneous(n, AgentEconomy::default())?,
            rate: DiscountRate::default(),
            lambda: 0.01,
            initial: HealthState::uniform(n, 0.01)?,
            grid: TimeGrid::new(150.0, 0.25)?,
            net,
        };
        let sol = solve_optimal_lockdown(&problem, &config)?;
        println!(
            "k = {k} (density {d:.4}): mean lockdown {:.2}%, surplus loss {:.2}%, deaths {:.4}",
            100.0 * sol.mean_lockdown(),
            sol.loss_pct,
            sol.final_mean_deaths()
        );
    }
    Ok(())
}
