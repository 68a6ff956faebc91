//! Optimal lockdown on a small-world network for one incidence cap.
//!
//! cargo run --release --example optimize_lockdown -- [n] [lambda] [seed] [max_seconds] [method]

use std::time::Instant;

use anyhow::Result;
use netlock::control::{
    solve_optimal_lockdown, verify_kkt, PlannerProblem, SolverConfig, SolverMethod,
};
use netlock::economy::{AgentEconomy, DiscountRate, Economy};
use netlock::epidemic::{EpidemicParams, HealthState, TimeGrid};
use netlock::netgen::{generate_small_world, RngSeed};

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NETLOCK_LOG", "info")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(300), |s| s.parse())?;
    let lambda: f64 = args.get(1).map_or(Ok(0.05), |s| s.parse())?;
    let seed: u64 = args.get(2).map_or(Ok(1), |s| s.parse())?;
    let max_seconds: Option<f64> = args.get(3).map(|s| s.parse()).transpose()?;
    let method = match args.get(4).map(String::as_str) {
        None | Some("augmented-lagrangian") => SolverMethod::AugmentedLagrangian,
        Some("active-set") => SolverMethod::ActiveSet,
        Some(other) => anyhow::bail!("unknown method {other}"),
    };

    let net = generate_small_world(n, 4, 0.1, RngSeed(seed))?;
    let problem = PlannerProblem {
        net,
        epi: EpidemicParams::baseline(),
        econ: Economy::homogeneous(n, AgentEconomy::default())?,
        rate: DiscountRate::default(),
        lambda,
        initial: HealthState::uniform(n, 0.01)?,
        grid: TimeGrid::new(150.0, 0.25)?,
    };
    let config = SolverConfig {
        max_seconds,
        method,
        ..SolverConfig::default().single_start()
    };
    let started = Instant::now();
    let sol = solve_optimal_lockdown(&problem, &config)?;
    let kkt = verify_kkt(&sol, &problem, &config)?;
    println!(
        "lambda {lambda}: mean lockdown {:.2}%, surplus loss {:.2}%, deaths {:.4}, converged {} ({} rounds, {} steps) in {:.1}s",
        100.0 * sol.mean_lockdown(),
        sol.loss_pct,
        sol.final_mean_deaths(),
        sol.converged,
        sol.iterations,
        sol.gradient_steps,
        started.elapsed().as_secs_f64()
    );
    println!(
        "kkt: stationarity {:.2e}, slackness {:.2e}, violation {:.2e}",
        kkt.stationarity, kkt.complementary_slackness, kkt.primal_violation
    );
    Ok(())
}
