//! Per-agent surplus and the economy-wide loss of a uniform lockdown.
//!
//! cargo run --example surplus_loss

use anyhow::Result;
use netlock::economy::{surplus, surplus_loss_pct, AgentEconomy, DiscountRate, Economy};
use netlock::epidemic::{
    integrate, AgentHealth, EpidemicParams, HealthState, LockdownPolicy, TimeGrid,
};
use netlock::netgen::generate_ring_lattice;

fn main() -> Result<()> {
    let agent = AgentEconomy::default();
    let healthy = AgentHealth {
        s: 1.0,
        x: 0.0,
        r: 0.0,
        d: 0.0,
    };
    for l in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!("W(l = {l:.2}) = {:.6}", surplus(&agent, healthy, l));
    }

    // Without infection the loss is the lockdown's cost alone.
    let n = 20;
    let net = generate_ring_lattice(n, 2)?;
    let grid = TimeGrid::new(30.0, 0.5)?;
    let econ = Economy::homogeneous(n, agent)?;
    for level in [0.1, 0.5] {
        let policy = LockdownPolicy::constant(grid.len(), n, level)?;
        let traj = integrate(
            &net,
            &EpidemicParams::baseline(),
            &policy,
            &HealthState::disease_free(n),
            grid,
        )?;
        println!(
            "uniform lockdown {level}: surplus loss {:.3}%",
            surplus_loss_pct(&traj, &econ, DiscountRate::default())?
        );
    }
    Ok(())
}
