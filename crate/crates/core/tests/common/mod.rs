#![allow(dead_code)]

use netlock::control::PlannerProblem;
use netlock::economy::{AgentEconomy, DiscountRate, Economy};
use netlock::epidemic::{EpidemicParams, HealthState, TimeGrid};
use netlock::netgen::{generate_small_world, Network, RngSeed};

pub fn problem(net: Network, lambda: f64, horizon: f64, dt: f64, x0: f64) -> PlannerProblem {
    let n = net.n();
    PlannerProblem {
        net,
        epi: EpidemicParams::baseline(),
        econ: Economy::homogeneous(n, AgentEconomy::default()).unwrap(),
        rate: DiscountRate::default(),
        lambda,
        initial: HealthState::uniform(n, x0).unwrap(),
        grid: TimeGrid::new(horizon, dt).unwrap(),
    }
}

pub fn small_world_problem(
    n: usize,
    k: usize,
    seed: u64,
    lambda: f64,
    horizon: f64,
    dt: f64,
) -> PlannerProblem {
    let net = generate_small_world(n, k, 0.1, RngSeed(seed)).unwrap();
    problem(net, lambda, horizon, dt, 0.01)
}

/// Root of z = 1 − exp(−m z) in (0, 1] by bisection.
pub fn scalar_final_size(m: f64) -> f64 {
    let (mut lo, mut hi) = (1e-12, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid - (1.0 - (-m * mid).exp()) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
