//! Costate gradient of the augmented objective against central finite
//! differences at a random policy.
//!
//! cargo run --release --example gradient_check

use anyhow::Result;
use netlock::control::{
    adjoint_integrate, augmented_objective, control_gradient, ConstraintMultipliers,
    LockdownPolicy, PlannerProblem,
};
use netlock::economy::{AgentEconomy, DiscountRate, Economy};
use netlock::epidemic::{integrate, EpidemicParams, HealthState, TimeGrid};
use netlock::netgen::{generate_small_world, RngSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let n = 5;
    let problem = PlannerProblem {
        net: generate_small_world(n, 2, 0.2, RngSeed(2))?,
        epi: EpidemicParams::baseline(),
        econ: Economy::homogeneous(n, AgentEconomy::default())?,
        rate: DiscountRate::default(),
        lambda: 0.005,
        initial: HealthState::uniform(n, 0.05)?,
        grid: TimeGrid::new(5.0, 0.25)?,
    };
    let (len, dt) = (problem.grid.len(), problem.grid.dt);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let policy = LockdownPolicy::from_values(
        len,
        n,
        (0..len * n).map(|_| rng.gen_range(0.1..0.9)).collect(),
    )?;
    let mut mult = ConstraintMultipliers::zeros(len, n, 20.0);
    mult.theta
        .iter_mut()
        .for_each(|t| *t = rng.gen_range(0.0..1.0));

    let traj = integrate(
        &problem.net,
        &problem.epi,
        &policy,
        &problem.initial,
        problem.grid,
    )?;
    let adjoint = adjoint_integrate(&traj, &mult, &problem)?;
    let grad = control_gradient(&traj, &adjoint, &mult, &problem)?;

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for q in (0..len * n).step_by(7) {
        let shifted = |delta: f64| -> Result<f64> {
            let mut v = policy.values().to_vec();
            v[q] += delta;
            Ok(augmented_objective(
                &problem,
                &LockdownPolicy::from_values(len, n, v)?,
                &mult,
            )?)
        };
        let fd = (shifted(h)? - shifted(-h)?) / (2.0 * h) / dt;
        let rel = (grad[q] - fd).abs() / fd.abs().max(1e-3);
        worst = worst.max(rel);
        println!(
            "entry {q:>3}: costate {:+.8e}  differences {fd:+.8e}",
            grad[q]
        );
    }
    println!("worst relative error {worst:.2e}");
    Ok(())
}
