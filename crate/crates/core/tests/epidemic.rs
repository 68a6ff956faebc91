mod common;

use netlock::epidemic::{
    attack_rate_check, classify_dfe_stability, final_size, integrate, next_generation_matrix,
    DfeStability, EpidemicParams, HealthState, LockdownPolicy, NextGenMatrix, TimeGrid,
};
use netlock::netgen::{
    generate_random, generate_ring_lattice, generate_scale_free, generate_small_world, RngSeed,
};
use proptest::prelude::*;

#[test]
fn conservation_over_many_integrations() {
    let mut combos = 0;
    for seed in 0..4u64 {
        let nets = [
            generate_ring_lattice(40, 4).unwrap(),
            generate_small_world(60, 4, 0.1, RngSeed(seed)).unwrap(),
            generate_random(50, 80, RngSeed(seed)).unwrap(),
            generate_scale_free(50, 2, RngSeed(seed)).unwrap(),
        ];
        for (idx, net) in nets.iter().enumerate() {
            let n = net.n();
            let params =
                EpidemicParams::new(0.1 + 0.1 * seed as f64, 0.04 + 0.01 * idx as f64, 0.01)
                    .unwrap();
            let dt = [0.25, 0.1][(seed as usize + idx) % 2];
            let grid = TimeGrid::new(60.0, dt).unwrap();
            let level = 0.2 * idx as f64;
            let policy = LockdownPolicy::constant(grid.len(), n, level).unwrap();
            let traj = integrate(
                net,
                &params,
                &policy,
                &HealthState::uniform(n, 0.02).unwrap(),
                grid,
            )
            .unwrap();
            assert!(traj.max_conservation_error() <= 1e-9);
            let (lo, hi) = traj.entry_range();
            assert!(lo >= -1e-9 && hi <= 1.0 + 1e-9);
            combos += 1;
        }
    }
    assert!(combos >= 16);
}

#[test]
fn full_lockdown_decays_exponentially() {
    let net = generate_small_world(30, 4, 0.1, RngSeed(1)).unwrap();
    let grid = TimeGrid::new(18.0, 0.25).unwrap();
    let policy = LockdownPolicy::constant(grid.len(), 30, 1.0).unwrap();
    let traj = integrate(
        &net,
        &EpidemicParams::baseline(),
        &policy,
        &HealthState::uniform(30, 0.1).unwrap(),
        grid,
    )
    .unwrap();
    let k = grid.index_of(18.0).unwrap();
    for &x in traj.x_at(k) {
        assert!((x - 0.1 * (-1.0f64).exp()).abs() < 1e-6);
    }
}

#[test]
fn rk4_is_fourth_order() {
    let net = generate_small_world(20, 4, 0.2, RngSeed(4)).unwrap();
    let params = EpidemicParams::baseline();
    let init = HealthState::uniform(20, 0.05).unwrap();
    let final_x = |dt: f64| {
        let grid = TimeGrid::new(8.0, dt).unwrap();
        let policy = LockdownPolicy::constant(grid.len(), 20, 0.3).unwrap();
        let traj = integrate(&net, &params, &policy, &init, grid).unwrap();
        traj.x_at(grid.len() - 1).to_vec()
    };
    let reference = final_x(0.005);
    let err = |dt: f64| {
        final_x(dt)
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.4), err(0.2));
    let order = (e1 / e2).log2();
    assert!(order > 3.7 && order < 4.4, "observed order {order}");
}

#[test]
fn r0_matches_dense_eigensolver() {
    let net = generate_small_world(30, 4, 0.3, RngSeed(2)).unwrap();
    let params = EpidemicParams::baseline();
    let l: Vec<f64> = (0..30).map(|i| (i % 5) as f64 / 5.0).collect();
    let m = next_generation_matrix(&net, &params, &l).unwrap();
    let dense = nalgebra::DMatrix::from_row_slice(30, 30, &m.to_dense());
    let lead = nalgebra::SymmetricEigen::new(dense)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::MIN, f64::max);
    assert!((m.r0() - lead).abs() < 1e-8 * lead.max(1.0));

    // Complete graph: (n − 1)·β/(γ + κ).
    let k5 = generate_ring_lattice(5, 4).unwrap();
    let m = next_generation_matrix(&k5, &params, &[0.0; 5]).unwrap();
    assert!((m.r0() - 4.0 * 0.2 * 18.0).abs() < 1e-8);
    assert_eq!(
        classify_dfe_stability(m.r0()).unwrap(),
        DfeStability::Unstable
    );
}

#[test]
fn final_size_oracles() {
    let scalar = final_size(&NextGenMatrix::from_dense(1, &[2.0]).unwrap()).unwrap();
    assert!((scalar.z[0] - common::scalar_final_size(2.0)).abs() < 1e-9);
    assert!((scalar.z[0] - 0.796812).abs() < 1e-5);
    assert!(scalar.residual < 1e-10);
    let pair = final_size(&NextGenMatrix::from_dense(2, &[0.0, 3.6, 3.6, 0.0]).unwrap()).unwrap();
    let oracle = common::scalar_final_size(3.6);
    assert!(pair.z.iter().all(|z| (z - oracle).abs() < 1e-9));
    assert!(pair.residual < 1e-10);
}

#[test]
fn simulated_attack_rate_matches_final_size() {
    let n = 50;
    let net = generate_small_world(n, 4, 0.1, RngSeed(3)).unwrap();
    let params = EpidemicParams::new(0.02, 0.8 / 18.0, 0.2 / 18.0).unwrap();
    let l = vec![0.0; n];
    let fs = final_size(&next_generation_matrix(&net, &params, &l).unwrap()).unwrap();
    let grid = TimeGrid::new(1500.0, 0.25).unwrap();
    let policy = LockdownPolicy::zeros(grid.len(), n);
    let traj = integrate(
        &net,
        &params,
        &policy,
        &HealthState::uniform(n, 1e-6).unwrap(),
        grid,
    )
    .unwrap();
    let rates = attack_rate_check(&traj).unwrap();
    for (sim, z) in rates.removed.iter().zip(&fs.z) {
        assert!((sim - z).abs() < 5e-2, "simulated {sim} vs fixed point {z}");
    }
}

#[test]
fn reproduction_threshold() {
    let n = 200;
    let net = generate_small_world(n, 4, 0.1, RngSeed(5)).unwrap();
    let base = EpidemicParams::baseline();
    let r0_base = next_generation_matrix(&net, &base, &vec![0.0; n])
        .unwrap()
        .r0();
    let peak_ratio = |target: f64| {
        let params =
            EpidemicParams::new(base.beta * target / r0_base, base.gamma, base.kappa).unwrap();
        let grid = TimeGrid::new(200.0, 0.25).unwrap();
        let traj = integrate(
            &net,
            &params,
            &LockdownPolicy::zeros(grid.len(), n),
            &HealthState::uniform(n, 1e-4).unwrap(),
            grid,
        )
        .unwrap();
        traj.mean_infection_series().into_iter().fold(0.0, f64::max) / 1e-4
    };
    assert!(peak_ratio(0.8) <= 2.0);
    assert!(peak_ratio(3.6) >= 5.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_stay_in_the_simplex(seed: u64, beta in 0.0f64..1.0, level in 0.0f64..1.0, x0 in 0.0f64..0.5) {
        let net = generate_small_world(20, 4, 0.2, RngSeed(seed)).unwrap();
        let params = EpidemicParams::new(beta, 0.8 / 18.0, 0.2 / 18.0).unwrap();
        let grid = TimeGrid::new(30.0, 0.25).unwrap();
        let policy = LockdownPolicy::constant(grid.len(), 20, level).unwrap();
        let traj = integrate(&net, &params, &policy, &HealthState::uniform(20, x0).unwrap(), grid).unwrap();
        prop_assert!(traj.max_conservation_error() <= 1e-9);
        let d = traj.mean_death_series();
        prop_assert!(d.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    }
}
