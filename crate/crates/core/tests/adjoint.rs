mod common;

use netlock::control::{
    adjoint_integrate, augmented_objective, control_gradient, ConstraintMultipliers, LockdownPolicy,
};
use netlock::epidemic::integrate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_policy(len: usize, n: usize, rng: &mut ChaCha8Rng) -> LockdownPolicy {
    let values = (0..len * n).map(|_| rng.gen_range(0.05..0.95)).collect();
    LockdownPolicy::from_values(len, n, values).unwrap()
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let problem = common::small_world_problem(8, 4, 3, 0.004, 6.0, 0.5);
    let (len, n) = (problem.grid.len(), problem.n());
    let policy = random_policy(len, n, &mut rng);
    let mut mult = ConstraintMultipliers::zeros(len, n, 50.0);
    mult.theta
        .iter_mut()
        .for_each(|t| *t = rng.gen_range(0.0..2.0));

    let traj = integrate(
        &problem.net,
        &problem.epi,
        &policy,
        &problem.initial,
        problem.grid,
    )
    .unwrap();
    let adj = adjoint_integrate(&traj, &mult, &problem).unwrap();
    let grad = control_gradient(&traj, &adj, &mult, &problem).unwrap();

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for q in 0..len * n {
        let mut up = policy.values().to_vec();
        let mut down = up.clone();
        up[q] += h;
        down[q] -= h;
        let up = LockdownPolicy::from_values(len, n, up).unwrap();
        let down = LockdownPolicy::from_values(len, n, down).unwrap();
        let fd = (augmented_objective(&problem, &up, &mult).unwrap()
            - augmented_objective(&problem, &down, &mult).unwrap())
            / (2.0 * h)
            / problem.grid.dt;
        let rel = (grad[q] - fd).abs() / fd.abs().max(1e-3);
        worst = worst.max(rel);
    }
    assert!(worst < 1e-5, "worst relative gradient error {worst:e}");
}

#[test]
fn terminal_costates_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let problem = common::small_world_problem(10, 4, 5, 0.01, 5.0, 0.25);
    let (len, n) = (problem.grid.len(), problem.n());
    let policy = random_policy(len, n, &mut rng);
    let mult = ConstraintMultipliers::zeros(len, n, 0.0);
    let traj = integrate(
        &problem.net,
        &problem.epi,
        &policy,
        &problem.initial,
        problem.grid,
    )
    .unwrap();
    let adj = adjoint_integrate(&traj, &mult, &problem).unwrap();
    for mu in adj.at(len - 1) {
        assert!(mu.iter().all(|v| v.abs() < 1e-14));
    }
}
