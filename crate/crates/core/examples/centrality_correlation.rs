//! Who gets locked down? Correlation of each agent's average lockdown with
//! four centrality measures.
//!
//! cargo run --release --example centrality_correlation -- [n] [seed]

use anyhow::Result;
use netlock::control::{
    lockdown_centrality_correlation, solve_optimal_lockdown, PlannerProblem, SolverConfig,
};
use netlock::economy::{AgentEconomy, DiscountRate, Economy};
use netlock::epidemic::{EpidemicParams, HealthState, TimeGrid};
use netlock::netgen::{centrality, generate_small_world, CentralityKind, RngSeed};

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(300), |s| s.parse())?;
    let seed: u64 = args.get(1).map_or(Ok(1), |s| s.parse())?;

    let problem = PlannerProblem {
        net: generate_small_world(n, 4, 0.1, RngSeed(seed))?,
        epi: EpidemicParams::baseline(),
        econ: Economy::homogeneous(n, AgentEconomy::default())?,
        rate: DiscountRate::default(),
        lambda: 0.1,
        initial: HealthState::uniform(n, 0.01)?,
        grid: TimeGrid::new(150.0, 0.25)?,
    };
    let sol = solve_optimal_lockdown(&problem, &SolverConfig::default().single_start())?;
    println!(
        "mean lockdown {:.3}% (converged {})",
        100.0 * sol.mean_lockdown(),
        sol.converged
    );
    for kind in CentralityKind::ALL {
        let c = centrality(&problem.net, kind)?;
        let corr = lockdown_centrality_correlation(&sol.policy, &c)?;
        println!(
            "{:<12} r = {:+.4}  p = {:.2e}",
            kind.name(),
            corr.r,
            corr.p_value
        );
    }
    Ok(())
}
