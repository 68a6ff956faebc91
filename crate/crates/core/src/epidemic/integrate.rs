use crate::netgen::Network;

use super::dynamics::{Compartments, Kernel};
use super::{EpidemicError, EpidemicParams, HealthState, LockdownPolicy, TimeGrid, STATE_TOL};

/// States on a [`TimeGrid`] together with the policy that produced them.
///
/// Compartments are stored row-major `(grid point, agent)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    n: usize,
    s: Vec<f64>,
    x: Vec<f64>,
    r: Vec<f64>,
    d: Vec<f64>,
    policy: LockdownPolicy,
}

impl Trajectory {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn policy(&self) -> &LockdownPolicy {
        &self.policy
    }

    fn row<'v>(&self, v: &'v [f64], k: usize) -> &'v [f64] {
        &v[k * self.n..(k + 1) * self.n]
    }

    pub fn s_at(&self, k: usize) -> &[f64] {
        self.row(&self.s, k)
    }

    pub fn x_at(&self, k: usize) -> &[f64] {
        self.row(&self.x, k)
    }

    pub fn r_at(&self, k: usize) -> &[f64] {
        self.row(&self.r, k)
    }

    pub fn d_at(&self, k: usize) -> &[f64] {
        self.row(&self.d, k)
    }

    pub fn state(&self, k: usize) -> HealthState {
        HealthState {
            s: self.s_at(k).to_vec(),
            x: self.x_at(k).to_vec(),
            r: self.r_at(k).to_vec(),
            d: self.d_at(k).to_vec(),
        }
    }

    pub fn initial_state(&self) -> HealthState {
        self.state(0)
    }

    pub fn final_state(&self) -> HealthState {
        self.state(self.grid.steps)
    }

    /// Population means `(s, x, r, d, l)` at grid point `k`.
    pub fn means_at(&self, k: usize) -> [f64; 5] {
        let m = |v: &[f64]| v.iter().sum::<f64>() / self.n as f64;
        [
            m(self.s_at(k)),
            m(self.x_at(k)),
            m(self.r_at(k)),
            m(self.d_at(k)),
            m(self.policy.at(k)),
        ]
    }

    pub fn mean_infection_series(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.means_at(k)[1]).collect()
    }

    pub fn mean_death_series(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.means_at(k)[3]).collect()
    }

    /// max over agents and grid points of |s + x + r + d − 1|.
    pub fn max_conservation_error(&self) -> f64 {
        (0..self.s.len())
            .map(|q| (self.s[q] + self.x[q] + self.r[q] + self.d[q] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest and largest compartment entry anywhere on the trajectory.
    pub fn entry_range(&self) -> (f64, f64) {
        self.s
            .iter()
            .chain(&self.x)
            .chain(&self.r)
            .chain(&self.d)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Fixed-step classical RK4 integration of the N-SIRD system.
///
/// The control is held at `policy` row `k` over `[t_k, t_{k+1})`. Entries
/// that overshoot `[0, 1]` by at most 1e−9 are clamped; larger excursions
/// abort with [`EpidemicError::Unstable`].
pub fn integrate(
    net: &Network,
    params: &EpidemicParams,
    policy: &LockdownPolicy,
    initial: &HealthState,
    grid: TimeGrid,
) -> Result<Trajectory, EpidemicError> {
    let n = net.n();
    params.validate()?;
    if initial.n() != n {
        return Err(EpidemicError::Dimension {
            what: "initial state",
            expected: n,
            got: initial.n(),
        });
    }
    initial.validate()?;
    if policy.n() != n || policy.grid_len() != grid.len() {
        return Err(EpidemicError::Dimension {
            what: "policy grid",
            expected: grid.len() * n,
            got: policy.grid_len() * policy.n(),
        });
    }
    integrate_unchecked(&Kernel::new(net, *params), policy, initial, grid)
}

pub(crate) fn integrate_unchecked(
    kernel: &Kernel<'_>,
    policy: &LockdownPolicy,
    initial: &HealthState,
    grid: TimeGrid,
) -> Result<Trajectory, EpidemicError> {
    integrate_feedback(kernel, policy, initial, grid, |_, _, _| {})
}

/// RK4 integration where `control(k, state_k, row_k)` may overwrite policy
/// row `k` from the state at t_k before the step is taken; the trajectory
/// records the rows actually applied.
pub(crate) fn integrate_feedback(
    kernel: &Kernel<'_>,
    policy: &LockdownPolicy,
    initial: &HealthState,
    grid: TimeGrid,
    mut control: impl FnMut(usize, &Compartments, &mut [f64]),
) -> Result<Trajectory, EpidemicError> {
    let n = kernel.net.n();
    let len = grid.len();
    let mut traj = Trajectory {
        grid,
        n,
        s: vec![0.0; len * n],
        x: vec![0.0; len * n],
        r: vec![0.0; len * n],
        d: vec![0.0; len * n],
        policy: policy.clone(),
    };
    traj.s[..n].copy_from_slice(&initial.s);
    traj.x[..n].copy_from_slice(&initial.x);
    traj.r[..n].copy_from_slice(&initial.r);
    traj.d[..n].copy_from_slice(&initial.d);

    let mut rk = Rk4Workspace::new(n);
    let mut cur = Compartments::from_state(initial);
    let mut next = Compartments::zeros(n);
    for k in 0..len {
        control(k, &cur, &mut traj.policy.values_mut()[k * n..(k + 1) * n]);
        if k == grid.steps {
            break;
        }
        rk.step(kernel, &cur, traj.policy.at(k), grid.dt, &mut next);
        let t = grid.time(k + 1);
        for (comp, name) in [
            (&mut next.s, "s"),
            (&mut next.x, "x"),
            (&mut next.r, "r"),
            (&mut next.d, "d"),
        ] {
            for (agent, v) in comp.iter_mut().enumerate() {
                if !(v.is_finite() && *v >= -STATE_TOL && *v <= 1.0 + STATE_TOL) {
                    return Err(EpidemicError::Unstable {
                        time: t,
                        agent,
                        compartment: name,
                        value: *v,
                    });
                }
                *v = v.clamp(0.0, 1.0);
            }
        }
        let lo = (k + 1) * n;
        traj.s[lo..lo + n].copy_from_slice(&next.s);
        traj.x[lo..lo + n].copy_from_slice(&next.x);
        traj.r[lo..lo + n].copy_from_slice(&next.r);
        traj.d[lo..lo + n].copy_from_slice(&next.d);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(traj)
}

/// Stage registers for one RK4 step; the stage states are kept so a reverse
/// sweep can differentiate through them.
pub(crate) struct Rk4Workspace {
    pub stage_states: [Compartments; 4],
    pub stage_slopes: [Compartments; 4],
    pressure: Vec<f64>,
}

impl Rk4Workspace {
    pub fn new(n: usize) -> Self {
        Self {
            stage_states: std::array::from_fn(|_| Compartments::zeros(n)),
            stage_slopes: std::array::from_fn(|_| Compartments::zeros(n)),
            pressure: vec![0.0; n],
        }
    }

    /// Fills the four stage states/slopes starting from `cur`.
    pub fn stages(&mut self, kernel: &Kernel<'_>, cur: &Compartments, l: &[f64], dt: f64) {
        let Self {
            stage_states,
            stage_slopes,
            pressure,
        } = self;
        stage_states[0].clone_from(cur);
        kernel.rhs(&stage_states[0], l, &mut stage_slopes[0], pressure);
        for (stage, h) in [(1, 0.5 * dt), (2, 0.5 * dt), (3, dt)] {
            stage_states[stage].set_axpy(cur, h, &stage_slopes[stage - 1]);
            kernel.rhs(&stage_states[stage], l, &mut stage_slopes[stage], pressure);
        }
    }

    pub fn step(
        &mut self,
        kernel: &Kernel<'_>,
        cur: &Compartments,
        l: &[f64],
        dt: f64,
        next: &mut Compartments,
    ) {
        self.stages(kernel, cur, l, dt);
        let [k1, k2, k3, k4] = &self.stage_slopes;
        let h = dt / 6.0;
        fn combine(out: &mut [f64], y: &[f64], h: f64, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) {
            for i in 0..out.len() {
                out[i] = y[i] + h * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
            }
        }
        combine(&mut next.s, &cur.s, h, &k1.s, &k2.s, &k3.s, &k4.s);
        combine(&mut next.x, &cur.x, h, &k1.x, &k2.x, &k3.x, &k4.x);
        combine(&mut next.r, &cur.r, h, &k1.r, &k2.r, &k3.r, &k4.r);
        combine(&mut next.d, &cur.d, h, &k1.d, &k2.d, &k3.d, &k4.d);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::generate_ring_lattice;

    #[test]
    fn full_lockdown_matches_exponential_decay() {
        let net = generate_ring_lattice(10, 2).unwrap();
        let params = EpidemicParams::baseline();
        let grid = TimeGrid::new(18.0, 0.1).unwrap();
        let policy = LockdownPolicy::constant(grid.len(), 10, 1.0).unwrap();
        let init = HealthState::uniform(10, 0.1).unwrap();
        let traj = integrate(&net, &params, &policy, &init, grid).unwrap();
        let expected = 0.1 * (-1.0f64).exp();
        for &x in traj.x_at(grid.steps) {
            assert!((x - expected).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn disease_free_trajectory_is_constant() {
        let net = generate_ring_lattice(6, 2).unwrap();
        let grid = TimeGrid::new(10.0, 0.25).unwrap();
        let traj = integrate(
            &net,
            &EpidemicParams::baseline(),
            &LockdownPolicy::zeros(grid.len(), 6),
            &HealthState::disease_free(6),
            grid,
        )
        .unwrap();
        assert_eq!(traj.final_state(), HealthState::disease_free(6));
    }

    #[test]
    fn huge_step_is_reported_unstable() {
        let net = Network::from_edges(2, &[(0, 1, 50.0)]).unwrap();
        let grid = TimeGrid::new(20.0, 5.0).unwrap();
        let res = integrate(
            &net,
            &EpidemicParams::new(2.0, 0.5, 0.5).unwrap(),
            &LockdownPolicy::zeros(grid.len(), 2),
            &HealthState::uniform(2, 0.3).unwrap(),
            grid,
        );
        assert!(
            matches!(res, Err(EpidemicError::Unstable { .. })),
            "{res:?}"
        );
    }

    #[test]
    fn rejects_mismatched_policy() {
        let net = generate_ring_lattice(4, 2).unwrap();
        let grid = TimeGrid::new(1.0, 0.5).unwrap();
        let res = integrate(
            &net,
            &EpidemicParams::baseline(),
            &LockdownPolicy::zeros(2, 4),
            &HealthState::disease_free(4),
            grid,
        );
        assert!(matches!(res, Err(EpidemicError::Dimension { .. })));
    }
}
