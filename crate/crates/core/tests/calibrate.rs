mod common;

use netlock::calibrate::{
    death_series, distance, estimate_lambda, params_from_state_inputs, simulate_death_series,
    CalibrateError, CalibrationTarget, LambdaSearch, SeriesKind,
};
use netlock::control::{SolverConfig, SolverMethod};
use netlock::epidemic::{integrate, EpidemicParams, LockdownPolicy};

fn quick_solver() -> SolverConfig {
    SolverConfig {
        method: SolverMethod::ActiveSet,
        max_iters: 3,
        ..SolverConfig::default().single_start()
    }
}

#[test]
fn full_lockdown_deaths_follow_the_closed_form() {
    let problem = common::small_world_problem(40, 4, 3, 0.05, 30.0, 0.25);
    let policy = LockdownPolicy::constant(problem.grid.len(), 40, 1.0).unwrap();
    let traj = integrate(
        &problem.net,
        &problem.epi,
        &policy,
        &problem.initial,
        problem.grid,
    )
    .unwrap();
    let scale = 1000.0;
    let cum = death_series(&traj, 30, scale, SeriesKind::Cumulative).unwrap();
    let inc = death_series(&traj, 30, scale, SeriesKind::Incident).unwrap();
    let mut prev = 0.0;
    for (t, (&c, &i)) in (1..=30).zip(cum.iter().zip(&inc)) {
        // Nobody meets: x decays at 1/18 per day and a fifth of removals die.
        let exact = scale * 0.01 * 0.2 * (1.0 - (-(t as f64) / 18.0).exp());
        assert!((c - exact).abs() < 1e-6, "day {t}: {c} vs {exact}");
        assert!((i - (exact - prev)).abs() < 1e-6);
        prev = exact;
    }
}

#[test]
fn cumulative_series_never_decreases() {
    let problem = common::small_world_problem(60, 6, 4, 0.02, 40.0, 0.25);
    let deaths = simulate_death_series(&problem, &quick_solver(), 40, 5000.0).unwrap();
    assert_eq!(deaths.len(), 40);
    assert!(deaths.windows(2).all(|w| w[1] >= w[0]));
    assert!(deaths[0] > 0.0);
}

#[test]
fn series_beyond_the_horizon_is_rejected() {
    let problem = common::small_world_problem(20, 4, 4, 0.02, 10.0, 0.25);
    let err = simulate_death_series(&problem, &quick_solver(), 11, 1.0).unwrap_err();
    assert!(matches!(err, CalibrateError::InvalidInput { .. }));
}

#[test]
fn distance_requires_equal_lengths() {
    let target = CalibrationTarget::new(vec![1.0, 2.0, 3.0], SeriesKind::Cumulative, 1.0).unwrap();
    assert_eq!(distance(&[1.0, 2.0, 5.0], &target).unwrap(), 4.0);
    assert!(matches!(
        distance(&[1.0], &target),
        Err(CalibrateError::LengthMismatch {
            model: 1,
            target: 3
        })
    ));
}

#[test]
fn csv_round_trip_and_death_multiplier() {
    let text = "day,deaths\n1,12.5\n2,25\n3,37.5\n";
    let target = CalibrationTarget::parse_csv(text, SeriesKind::Cumulative, 100.0, 0.8).unwrap();
    assert_eq!(target.daily_deaths, vec![10.0, 20.0, 30.0]);
    let again =
        CalibrationTarget::parse_csv(&target.to_csv(), SeriesKind::Cumulative, 100.0, 1.0).unwrap();
    assert_eq!(again, target);
    for bad in [
        "day,deaths\n2,1\n",
        "day,deaths\n1,x\n",
        "d,deaths\n1,1\n",
        "day,deaths\n1,-1\n",
    ] {
        assert!(
            CalibrationTarget::parse_csv(bad, SeriesKind::Cumulative, 1.0, 1.0).is_err(),
            "{bad}"
        );
    }
}

#[test]
fn round_trip_recovers_a_binding_cap() {
    let lambda_true = 0.01;
    let problem = common::small_world_problem(60, 6, 9, lambda_true, 30.0, 0.25);
    let solver = quick_solver();
    let scale = 5000.0;
    let deaths = simulate_death_series(&problem, &solver, 30, scale).unwrap();
    let target = CalibrationTarget::new(deaths, SeriesKind::Cumulative, scale).unwrap();
    let search = LambdaSearch {
        lambda_min: 1e-3,
        lambda_max: 0.3,
        grid_points: 12,
        ..LambdaSearch::default()
    };
    let result = estimate_lambda(&target, &problem, &search, &solver).unwrap();
    assert!(result.identified);
    let rel = (result.lambda_hat - lambda_true).abs() / lambda_true;
    assert!(
        rel < 0.1,
        "lambda_hat {} ({:.1}%)",
        result.lambda_hat,
        100.0 * rel
    );
    assert!(result.trace.iter().all(|p| p.distance >= result.objective));
}

#[test]
fn no_transmission_is_unidentified() {
    let mut problem = common::small_world_problem(30, 4, 5, 0.05, 20.0, 0.5);
    problem.epi = EpidemicParams::new(0.0, 0.8 / 18.0, 0.2 / 18.0).unwrap();
    let solver = quick_solver();
    let deaths = simulate_death_series(&problem, &solver, 20, 1e5).unwrap();
    let target = CalibrationTarget::new(deaths, SeriesKind::Cumulative, 1e5).unwrap();
    let search = LambdaSearch {
        grid_points: 6,
        ..LambdaSearch::default()
    };
    let result = estimate_lambda(&target, &problem, &search, &solver).unwrap();
    assert!(!result.identified);
}

#[test]
fn state_inputs_map_to_rates() {
    let (epi, econ) = params_from_state_inputs(2.7, 0.02, 1.2, 0.9, 0.6, 3.0).unwrap();
    assert!((epi.beta - 0.15).abs() < 1e-12);
    assert!((epi.gamma + epi.kappa - 1.0 / 18.0).abs() < 1e-12);
    assert!((epi.kappa / (epi.gamma + epi.kappa) - 0.02).abs() < 1e-12);
    assert_eq!((econ.k, econ.phi, econ.psi), (3.0, 0.0, 1.0));
    assert!(params_from_state_inputs(2.7, 1.5, 1.2, 0.9, 0.6, 3.0).is_err());
}
