//! Round trip of the λ estimator: plant a cap, simulate 77 days of deaths,
//! then recover the cap from that series alone.
//!
//! cargo run --release --example calibrate_lambda -- [lambda_true] [seed] [max_iters]

use std::time::Instant;

use anyhow::Result;
use netlock::calibrate::{
    estimate_lambda, simulate_death_series, CalibrationTarget, LambdaSearch, SeriesKind,
};
use netlock::control::{PlannerProblem, SolverConfig, SolverMethod};
use netlock::economy::{AgentEconomy, DiscountRate, Economy};
use netlock::epidemic::{EpidemicParams, HealthState, TimeGrid};
use netlock::netgen::{generate_small_world, RngSeed};

const DAYS: usize = 77;
const RESIDENTS: f64 = 10_000.0;

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NETLOCK_LOG", "warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let lambda_true: f64 = args.first().map_or(Ok(0.05), |s| s.parse())?;
    let seed: u64 = args.get(1).map_or(Ok(1), |s| s.parse())?;
    let max_iters: usize = args.get(2).map_or(Ok(3), |s| s.parse())?;

    let n = 200;
    let problem = PlannerProblem {
        net: generate_small_world(n, 4, 0.1, RngSeed(seed))?,
        epi: EpidemicParams::baseline(),
        econ: Economy::homogeneous(n, AgentEconomy::default())?,
        rate: DiscountRate::default(),
        lambda: lambda_true,
        initial: HealthState::uniform(n, 0.01)?,
        grid: TimeGrid::new(DAYS as f64, 0.25)?,
    };
    // A short feasible-direction solve per λ keeps the search affordable.
    let solver = SolverConfig {
        method: SolverMethod::ActiveSet,
        max_iters,
        ..SolverConfig::default().single_start()
    };

    let started = Instant::now();
    let deaths = simulate_death_series(&problem, &solver, DAYS, RESIDENTS)?;
    let target = CalibrationTarget::new(deaths, SeriesKind::Cumulative, RESIDENTS)?;
    println!(
        "planted lambda {lambda_true}: {:.1} deaths by day {DAYS} ({:.1}s)",
        target.daily_deaths[DAYS - 1],
        started.elapsed().as_secs_f64()
    );

    let started = Instant::now();
    let result = estimate_lambda(&target, &problem, &LambdaSearch::default(), &solver)?;
    println!(
        "lambda_hat {:.5} (relative error {:.1}%), distance {:.3e}, identified {}, {} evaluations in {:.1}s",
        result.lambda_hat,
        100.0 * (result.lambda_hat - lambda_true).abs() / lambda_true,
        result.objective,
        result.identified,
        result.trace.len(),
        started.elapsed().as_secs_f64()
    );
    for p in &result.trace {
        println!("  {:.6e}  {:.6e}", p.lambda, p.distance);
    }
    Ok(())
}
