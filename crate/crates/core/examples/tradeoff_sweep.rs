//! Health versus wealth: mean lockdown, surplus loss and deaths for a list
//! of incidence caps, solved in parallel.
//!
//! cargo run --release --example tradeoff_sweep -- [n] [seed] [max_seconds]

use anyhow::Result;
use netlock::control::{solve_optimal_lockdown, PlannerProblem, SolverConfig};
use netlock::economy::{AgentEconomy, DiscountRate, Economy};
use netlock::epidemic::{EpidemicParams, HealthState, TimeGrid};
use netlock::netgen::{generate_small_world, RngSeed};
use rayon::prelude::*;

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NETLOCK_LOG", "warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(300), |s| s.parse())?;
    let seed: u64 = args.get(1).map_or(Ok(1), |s| s.parse())?;
    let max_seconds: f64 = args.get(2).map_or(Ok(45.0), |s| s.parse())?;

    let base = PlannerProblem {
        net: generate_small_world(n, 4, 0.1, RngSeed(seed))?,
        epi: EpidemicParams::baseline(),
        econ: Economy::homogeneous(n, AgentEconomy::default())?,
        rate: DiscountRate::default(),
        lambda: 0.0,
        initial: HealthState::uniform(n, 0.01)?,
        grid: TimeGrid::new(150.0, 0.25)?,
    };
    let config = SolverConfig {
        max_seconds: Some(max_seconds),
        ..SolverConfig::default().single_start()
    };
    let lambdas = [0.01, 0.05, 0.1];
    let solutions: Vec<_> = lambdas
        .par_iter()
        .map(|&lambda| solve_optimal_lockdown(&base.with_lambda(lambda), &config))
        .collect();
    println!(
        "{:>7} {:>10} {:>9} {:>9} {:>10}",
        "lambda", "lockdown%", "loss%", "deaths", "converged"
    );
    for (lambda, sol) in lambdas.iter().zip(solutions) {
        let sol = sol?;
        println!(
            "{lambda:>7} {:>10.3} {:>9.3} {:>9.5} {:>10}",
            100.0 * sol.mean_lockdown(),
            sol.loss_pct,
            sol.final_mean_deaths(),
            sol.converged
        );
    }
    Ok(())
}
