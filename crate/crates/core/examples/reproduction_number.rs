//! Next-generation matrix, R0 and final epidemic size, compared with the
//! attack rate of a long simulation.
//!
//! cargo run --release --example reproduction_number -- [n] [lockdown]

use anyhow::Result;
use netlock::epidemic::{
    classify_dfe_stability, final_size, integrate, next_generation_matrix, EpidemicParams,
    HealthState, LockdownPolicy, TimeGrid,
};
use netlock::netgen::{generate_small_world, RngSeed};

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(50), |s| s.parse())?;
    let level: f64 = args.get(1).map_or(Ok(0.6), |s| s.parse())?;

    let net = generate_small_world(n, 4, 0.1, RngSeed(3))?;
    let params = EpidemicParams::baseline();
    let l = vec![level; n];
    let m = next_generation_matrix(&net, &params, &l)?;
    let r0 = m.r0();
    println!(
        "R0 = {r0:.4} ({:?} disease-free equilibrium)",
        classify_dfe_stability(r0)?
    );

    let fs = final_size(&m)?;
    let mean_z = fs.z.iter().sum::<f64>() / n as f64;
    println!(
        "final size: mean attack rate {mean_z:.4}, residual {:.1e}",
        fs.residual
    );

    let grid = TimeGrid::new(1000.0, 0.25)?;
    let policy = LockdownPolicy::constant(grid.len(), n, level)?;
    let traj = integrate(
        &net,
        &params,
        &policy,
        &HealthState::uniform(n, 1e-6)?,
        grid,
    )?;
    let [_, _, r, d, _] = traj.means_at(traj.len() - 1);
    println!(
        "simulated attack rate after {} days: {:.4}",
        grid.horizon(),
        r + d
    );
    Ok(())
}
