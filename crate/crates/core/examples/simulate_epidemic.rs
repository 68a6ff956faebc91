//! Uncontrolled versus constant lockdown on a small world: peak infection,
//! deaths, surplus loss and the conservation check.
//!
//! cargo run --release --example simulate_epidemic -- [n] [lockdown]

use anyhow::Result;
use netlock::economy::{surplus_loss_pct, AgentEconomy, DiscountRate, Economy};
use netlock::epidemic::{integrate, EpidemicParams, HealthState, LockdownPolicy, TimeGrid};
use netlock::netgen::{generate_small_world, RngSeed};

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(300), |s| s.parse())?;
    let level: f64 = args.get(1).map_or(Ok(0.3), |s| s.parse())?;

    let net = generate_small_world(n, 4, 0.1, RngSeed(1))?;
    let params = EpidemicParams::baseline();
    let grid = TimeGrid::new(150.0, 0.25)?;
    let initial = HealthState::uniform(n, 0.01)?;
    let econ = Economy::homogeneous(n, AgentEconomy::default())?;

    for l in [0.0, level] {
        let policy = LockdownPolicy::constant(grid.len(), n, l)?;
        let traj = integrate(&net, &params, &policy, &initial, grid)?;
        let x = traj.mean_infection_series();
        let (peak_k, peak) = x
            .iter()
            .enumerate()
            .fold((0, 0.0), |b, (k, &v)| if v > b.1 { (k, v) } else { b });
        let [_, _, _, d, _] = traj.means_at(traj.len() - 1);
        println!(
            "lockdown {l:.2}: peak infection {:.2}% on day {}, deaths {:.2}%, surplus loss {:.2}%, conservation error {:.1e}",
            100.0 * peak,
            grid.time(peak_k),
            100.0 * d,
            surplus_loss_pct(&traj, &econ, DiscountRate::default())?,
            traj.max_conservation_error()
        );
    }
    Ok(())
}
