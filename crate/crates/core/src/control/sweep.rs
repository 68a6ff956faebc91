//! Forward evaluation, reverse (adjoint) sweep and control gradient of the
//! discretized planner objective.
//!
//! The objective is the trapezoidal discounted surplus on the RK4 grid minus
//! the constraint terms Σ_k w_k Σ_i ψ(ẋ_i(t_k) − λ). The costates are the
//! exact reverse-mode sensitivities of that discrete objective with respect to
//! the grid states, so the gradient agrees with finite differences of the
//! discretization rather than only in the dt → 0 limit. The health-rate
//! function f_i is differentiated in the form that writes s_i = 1 − x_i − r_i − d_i,
//! which makes the s-costate depend only on the direct surplus terms.

use crate::economy::{surplus_and_partials, SurplusPartials};
use crate::epidemic::{
    integrate_unchecked, AgentHealth, Compartments, EpidemicParams, Kernel, LockdownPolicy,
    Rk4Workspace, Trajectory,
};
use crate::netgen::Network;

use super::{ConstraintMultipliers, ControlError, PlannerProblem};

/// Costates of `(x, r, d, s)` on the grid, row-major `(grid point, agent)`.
///
/// `mu*` approximate the present-value continuous costates at the grid
/// points (half of the local quadrature source removed, zero at the
/// horizon); the raw discrete sensitivities are kept for the gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointState {
    pub n: usize,
    pub grid_len: usize,
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub mu3: Vec<f64>,
    pub mu4: Vec<f64>,
    raw: Vec<Compartments>,
}

impl AdjointState {
    pub fn at(&self, k: usize) -> [&[f64]; 4] {
        let r = k * self.n..(k + 1) * self.n;
        [
            &self.mu1[r.clone()],
            &self.mu2[r.clone()],
            &self.mu3[r.clone()],
            &self.mu4[r],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.mu1
            .iter()
            .chain(&self.mu2)
            .chain(&self.mu3)
            .chain(&self.mu4)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// ẋ_i at every grid point from the N-SIRD right-hand side with the applied
/// control, row-major `(grid point, agent)`.
pub fn incidence(traj: &Trajectory, net: &Network, epi: &EpidemicParams) -> Vec<f64> {
    let kernel = Kernel::new(net, *epi);
    let n = traj.n();
    let mut out = vec![0.0; traj.len() * n];
    let mut pressure = vec![0.0; n];
    for k in 0..traj.len() {
        kernel.infection_rate(
            traj.s_at(k),
            traj.x_at(k),
            traj.policy().at(k),
            &mut out[k * n..(k + 1) * n],
            &mut pressure,
        );
    }
    out
}

/// Result of one forward pass.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub traj: Trajectory,
    pub objective: f64,
    pub augmented: f64,
    pub incidence: Vec<f64>,
    pub partials: Vec<SurplusPartials>,
    pub max_violation: f64,
}

pub(crate) fn evaluate(
    problem: &PlannerProblem,
    policy: &LockdownPolicy,
    mult: &ConstraintMultipliers,
) -> Result<Evaluation, ControlError> {
    let kernel = Kernel::new(&problem.net, problem.epi);
    let traj = integrate_unchecked(&kernel, policy, &problem.initial, problem.grid)?;
    Ok(Evaluation::new(problem, traj, mult))
}

impl Evaluation {
    /// Surplus, incidence and surplus partials along `traj`, which must be
    /// on the problem's grid.
    pub fn new(problem: &PlannerProblem, traj: Trajectory, mult: &ConstraintMultipliers) -> Self {
        let kernel = Kernel::new(&problem.net, problem.epi);
        let grid = problem.grid;
        let n = traj.n();
        let mut incidence = vec![0.0; traj.len() * n];
        let mut partials = Vec::with_capacity(traj.len() * n);
        let mut pressure = vec![0.0; n];
        let mut objective = 0.0;
        for k in 0..traj.len() {
            let l = traj.policy().at(k);
            kernel.infection_rate(
                traj.s_at(k),
                traj.x_at(k),
                l,
                &mut incidence[k * n..(k + 1) * n],
                &mut pressure,
            );
            let (s, x, r, d) = (traj.s_at(k), traj.x_at(k), traj.r_at(k), traj.d_at(k));
            let mut total = 0.0;
            for i in 0..n {
                let st = AgentHealth {
                    s: s[i],
                    x: x[i],
                    r: r[i],
                    d: d[i],
                };
                let (w, p) = surplus_and_partials(problem.econ.agent(i), st, l[i]);
                total += w;
                partials.push(p);
            }
            objective += grid.trapezoid_weight(k) * problem.rate.factor(grid.time(k)) * total;
        }
        let max_violation = incidence
            .iter()
            .map(|f| f - problem.lambda)
            .fold(0.0, f64::max);
        let mut ev = Evaluation {
            traj,
            objective,
            augmented: objective,
            incidence,
            partials,
            max_violation,
        };
        ev.augmented = augmented_value(problem, &ev, mult);
        ev
    }
}

/// Objective minus the weighted constraint terms under `mult`.
pub(crate) fn augmented_value(
    problem: &PlannerProblem,
    ev: &Evaluation,
    mult: &ConstraintMultipliers,
) -> f64 {
    let n = problem.n();
    let grid = problem.grid;
    let mut penalty = 0.0;
    for k in 0..grid.len() {
        let w = grid.trapezoid_weight(k);
        if w == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for i in 0..n {
            let q = k * n + i;
            row += mult.penalty(q, ev.incidence[q] - problem.lambda).0;
        }
        penalty += w * row;
    }
    ev.objective - penalty
}

struct VjpScratch {
    pressure: Vec<f64>,
    q: Vec<f64>,
    v: Vec<f64>,
    back: Vec<f64>,
}

impl VjpScratch {
    fn new(n: usize) -> Self {
        Self {
            pressure: vec![0.0; n],
            q: vec![0.0; n],
            v: vec![0.0; n],
            back: vec![0.0; n],
        }
    }
}

/// Vector–Jacobian product of the right-hand side at state `z` under `l`
/// with cotangent `a` on `(ẋ, ṙ, ḋ, ṡ)`; overwrites `gz` and `gl`.
fn dynamics_vjp(
    kernel: &Kernel<'_>,
    z: &Compartments,
    l: &[f64],
    a: &Compartments,
    gz: &mut Compartments,
    gl: &mut [f64],
    sc: &mut VjpScratch,
) {
    let EpidemicParams { beta, gamma, kappa } = kernel.params;
    let removal = gamma + kappa;
    let n = z.x.len();
    kernel.pressure(&z.x, l, &mut sc.pressure);
    for i in 0..n {
        let q = a.x[i] - a.s[i];
        let u = 1.0 - z.x[i] - z.r[i] - z.d[i];
        sc.q[i] = q;
        sc.v[i] = q * beta * u * (1.0 - l[i]);
    }
    kernel.net.mul_vec(&sc.v, &mut sc.back);
    for i in 0..n {
        let own = beta * sc.pressure[i] * sc.q[i];
        let u = 1.0 - z.x[i] - z.r[i] - z.d[i];
        let free = 1.0 - l[i];
        gz.x[i] =
            -free * own + free * sc.back[i] - removal * a.x[i] + gamma * a.r[i] + kappa * a.d[i];
        gz.r[i] = -free * own;
        gz.d[i] = -free * own;
        gz.s[i] = 0.0;
        gl[i] = -u * own - z.x[i] * sc.back[i];
    }
}

fn axpy_into(out: &mut Compartments, alpha: f64, a: &Compartments, beta: f64, b: &Compartments) {
    fn go(o: &mut [f64], alpha: f64, a: &[f64], beta: f64, b: &[f64]) {
        for ((o, a), b) in o.iter_mut().zip(a).zip(b) {
            *o = alpha * a + beta * b;
        }
    }
    go(&mut out.x, alpha, &a.x, beta, &b.x);
    go(&mut out.r, alpha, &a.r, beta, &b.r);
    go(&mut out.d, alpha, &a.d, beta, &b.d);
    go(&mut out.s, alpha, &a.s, beta, &b.s);
}

fn add_scaled(out: &mut Compartments, h: f64, a: &Compartments) {
    for (o, v) in [
        (&mut out.x, &a.x),
        (&mut out.r, &a.r),
        (&mut out.d, &a.d),
        (&mut out.s, &a.s),
    ] {
        for (o, v) in o.iter_mut().zip(v) {
            *o += h * v;
        }
    }
}

fn add_assign(out: &mut Compartments, a: &Compartments) {
    for (o, v) in [
        (&mut out.x, &a.x),
        (&mut out.r, &a.r),
        (&mut out.d, &a.d),
        (&mut out.s, &a.s),
    ] {
        for (o, v) in o.iter_mut().zip(v) {
            *o += v;
        }
    }
}

const MULTIPLIER_SWEEPS: usize = 2000;

/// Reduced gradient of a repaired policy.
pub(crate) struct Reduced {
    /// ∂L/∂l per unit time; zero on pinned entries.
    pub grad: Vec<f64>,
    /// Incidence multipliers θ (per unit time).
    pub theta: Vec<f64>,
    /// Capped entries with a non-negative multiplier; the next forward
    /// pass holds them on the cap.
    pub pinned: Vec<bool>,
}

/// Reverse pass through the RK4 stages and the per-grid-point sources.
pub(crate) struct ReverseEngine<'a> {
    problem: &'a PlannerProblem,
    kernel: Kernel<'a>,
    rk: Rk4Workspace,
    sc: VjpScratch,
    abar: Compartments,
    gz: Compartments,
    gl: Vec<f64>,
    state: Compartments,
}

impl<'a> ReverseEngine<'a> {
    pub fn new(problem: &'a PlannerProblem) -> Self {
        let n = problem.n();
        Self {
            problem,
            kernel: Kernel::new(&problem.net, problem.epi),
            rk: Rk4Workspace::new(n),
            sc: VjpScratch::new(n),
            abar: Compartments::zeros(n),
            gz: Compartments::zeros(n),
            gl: vec![0.0; n],
            state: Compartments::zeros(n),
        }
    }

    fn load_state(&mut self, traj: &Trajectory, k: usize) {
        self.state.s.copy_from_slice(traj.s_at(k));
        self.state.x.copy_from_slice(traj.x_at(k));
        self.state.r.copy_from_slice(traj.r_at(k));
        self.state.d.copy_from_slice(traj.d_at(k));
    }

    /// Transposed Jacobians of one RK4 step z_{k+1} = Φ(z_k, l_k):
    /// `lam_out = (∂Φ/∂z)ᵀ lam`, `gl_out = (∂Φ/∂l)ᵀ lam`. Expects the state
    /// of grid point `k` loaded.
    fn step_vjp(
        &mut self,
        l: &[f64],
        dt: f64,
        lam: &Compartments,
        lam_out: &mut Compartments,
        gl_out: &mut [f64],
    ) {
        self.rk.stages(&self.kernel, &self.state, l, dt);
        lam_out.clone_from(lam);
        gl_out.iter_mut().for_each(|v| *v = 0.0);
        // (stage, weight on lam, weight on the previous stage's gz)
        let plan = [
            (3, dt / 6.0, 0.0),
            (2, dt / 3.0, dt),
            (1, dt / 3.0, 0.5 * dt),
            (0, dt / 6.0, 0.5 * dt),
        ];
        for (idx, &(stage, w_lam, w_prev)) in plan.iter().enumerate() {
            // gz still holds the previous stage's sensitivities
            let w_prev = if idx == 0 { 0.0 } else { w_prev };
            axpy_into(&mut self.abar, w_lam, lam, w_prev, &self.gz);
            dynamics_vjp(
                &self.kernel,
                &self.rk.stage_states[stage],
                l,
                &self.abar,
                &mut self.gz,
                &mut self.gl,
                &mut self.sc,
            );
            add_assign(lam_out, &self.gz);
            for (o, g) in gl_out.iter_mut().zip(&self.gl) {
                *o += g;
            }
        }
    }

    /// Direct sensitivities of the grid-point-`k` running term (surplus and
    /// constraint penalty, with quadrature weight). Expects the state loaded.
    fn sources(
        &mut self,
        ev: &Evaluation,
        k: usize,
        mult: &ConstraintMultipliers,
        src_z: &mut Compartments,
        src_l: &mut [f64],
    ) {
        let problem = self.problem;
        let grid = problem.grid;
        let n = problem.n();
        let w = grid.trapezoid_weight(k);
        let l = ev.traj.policy().at(k);
        for i in 0..n {
            let (_, slope) = mult.penalty(k * n + i, ev.incidence[k * n + i] - problem.lambda);
            self.abar.x[i] = -w * slope;
            self.abar.r[i] = 0.0;
            self.abar.d[i] = 0.0;
            self.abar.s[i] = 0.0;
        }
        dynamics_vjp(
            &self.kernel,
            &self.state,
            l,
            &self.abar,
            src_z,
            src_l,
            &mut self.sc,
        );
        let disc = w * problem.rate.factor(grid.time(k));
        for (i, part) in ev.partials[k * n..(k + 1) * n].iter().enumerate() {
            src_z.x[i] += disc * part.dx;
            src_z.r[i] += disc * part.dr;
            src_z.d[i] += disc * part.dd;
            src_z.s[i] += disc * part.ds;
            src_l[i] += disc * part.dl;
        }
    }

    /// Full backward sweep. Returns the costates and, when requested, the
    /// gradient density ∂J/∂l(t_k)/dt.
    pub fn sweep(
        &mut self,
        ev: &Evaluation,
        mult: &ConstraintMultipliers,
        want_gradient: bool,
    ) -> Result<(AdjointState, Option<Vec<f64>>), ControlError> {
        let problem = self.problem;
        let grid = problem.grid;
        let n = problem.n();
        let len = grid.len();
        let dt = grid.dt;
        let mut raw = vec![Compartments::zeros(n); len];
        let mut grad = want_gradient.then(|| vec![0.0; len * n]);
        let mut src_z = Compartments::zeros(n);
        let mut src_l = vec![0.0; n];
        let mut gl_step = vec![0.0; n];
        let mut mu = [
            vec![0.0; len * n],
            vec![0.0; len * n],
            vec![0.0; len * n],
            vec![0.0; len * n],
        ];

        for k in (0..len).rev() {
            self.load_state(&ev.traj, k);
            self.sources(ev, k, mult, &mut src_z, &mut src_l);
            let mut lam_k = Compartments::zeros(n);
            if k + 1 < len {
                let lam_next = std::mem::replace(&mut raw[k + 1], Compartments::zeros(0));
                self.step_vjp(
                    ev.traj.policy().at(k),
                    dt,
                    &lam_next,
                    &mut lam_k,
                    &mut gl_step,
                );
                raw[k + 1] = lam_next;
            } else {
                gl_step.iter_mut().for_each(|v| *v = 0.0);
            }
            add_assign(&mut lam_k, &src_z);

            let w = grid.trapezoid_weight(k);
            let remove = if k == 0 || w == 0.0 {
                0.0
            } else {
                0.5 * dt / w
            };
            for i in 0..n {
                let q = k * n + i;
                mu[0][q] = lam_k.x[i] - remove * src_z.x[i];
                mu[1][q] = lam_k.r[i] - remove * src_z.r[i];
                mu[2][q] = lam_k.d[i] - remove * src_z.d[i];
                mu[3][q] = lam_k.s[i] - remove * src_z.s[i];
            }
            if let Some(g) = grad.as_mut() {
                for i in 0..n {
                    g[k * n + i] = (gl_step[i] + src_l[i]) / dt;
                }
            }
            if !lam_k.x.iter().chain(&lam_k.s).all(|v| v.is_finite()) {
                return Err(ControlError::AdjointBlowUp { time: grid.time(k) });
            }
            raw[k] = lam_k;
        }
        let [mu1, mu2, mu3, mu4] = mu;
        Ok((
            AdjointState {
                n,
                grid_len: len,
                mu1,
                mu2,
                mu3,
                mu4,
                raw,
            },
            grad,
        ))
    }

    /// Backward sweep for a policy produced by the cap repair. The `capped`
    /// entries sit on ẋ = λ; their multipliers follow from stationarity in
    /// their own coordinates, which eliminates them from the gradient.
    /// Capped entries whose multiplier would be negative are released.
    pub fn sweep_reduced(
        &mut self,
        ev: &Evaluation,
        capped: &[bool],
    ) -> Result<Reduced, ControlError> {
        let problem = self.problem;
        let grid = problem.grid;
        let n = problem.n();
        let len = grid.len();
        let dt = grid.dt;
        let mut out = Reduced {
            grad: vec![0.0; len * n],
            theta: vec![0.0; len * n],
            pinned: vec![false; len * n],
        };
        let mut lam_next = Compartments::zeros(n);
        let mut lam_k = Compartments::zeros(n);
        let mut gl = vec![0.0; n];
        let mut src_z = Compartments::zeros(n);
        let mut src_l = vec![0.0; n];
        let mut kappa = vec![0.0; n];
        let mut fz = Compartments::zeros(n);
        let mut fl = vec![0.0; n];
        for k in (0..len).rev() {
            self.load_state(&ev.traj, k);
            let l = ev.traj.policy().at(k);
            self.econ_sources(ev, k, &mut src_z, &mut src_l);
            if k + 1 < len {
                self.step_vjp(l, dt, &lam_next, &mut lam_k, &mut gl);
            } else {
                lam_k = Compartments::zeros(n);
                gl.iter_mut().for_each(|v| *v = 0.0);
            }
            add_assign(&mut lam_k, &src_z);
            for (g, s) in gl.iter_mut().zip(&src_l) {
                *g += s;
            }
            let rows = k * n..(k + 1) * n;
            if capped[rows.clone()].iter().any(|&a| a) {
                let pinned = &mut out.pinned[rows.clone()];
                self.solve_multipliers(l, &gl, &capped[rows.clone()], &mut kappa, pinned);
                self.abar = Compartments::zeros(n);
                self.abar.x.copy_from_slice(&kappa);
                dynamics_vjp(
                    &self.kernel,
                    &self.state,
                    l,
                    &self.abar,
                    &mut fz,
                    &mut fl,
                    &mut self.sc,
                );
                add_scaled(&mut lam_k, -1.0, &fz);
                for i in 0..n {
                    gl[i] -= fl[i];
                    if pinned[i] {
                        gl[i] = 0.0;
                    }
                }
                let w = grid.trapezoid_weight(k);
                if w > 0.0 {
                    for i in 0..n {
                        out.theta[k * n + i] = kappa[i] / w;
                    }
                }
            }
            for i in 0..n {
                out.grad[k * n + i] = gl[i] / dt;
            }
            if !lam_k.x.iter().chain(&lam_k.s).all(|v| v.is_finite()) {
                return Err(ControlError::AdjointBlowUp { time: grid.time(k) });
            }
            std::mem::swap(&mut lam_next, &mut lam_k);
        }
        Ok(out)
    }

    fn econ_sources(
        &mut self,
        ev: &Evaluation,
        k: usize,
        src_z: &mut Compartments,
        src_l: &mut [f64],
    ) {
        let problem = self.problem;
        let grid = problem.grid;
        let n = problem.n();
        let disc = grid.trapezoid_weight(k) * problem.rate.factor(grid.time(k));
        for (i, part) in ev.partials[k * n..(k + 1) * n].iter().enumerate() {
            src_z.x[i] = disc * part.dx;
            src_z.r[i] = disc * part.dr;
            src_z.d[i] = disc * part.dd;
            src_z.s[i] = disc * part.ds;
            src_l[i] = disc * part.dl;
        }
    }

    /// Solves Σ_i κ_i ∂f_i/∂l_j = G_j over the pinned set by Gauss–Seidel,
    /// dropping constraints whose multiplier comes out negative (their agent
    /// would rather lock down more than the cap requires).
    fn solve_multipliers(
        &mut self,
        l: &[f64],
        g: &[f64],
        capped: &[bool],
        kappa: &mut [f64],
        pinned: &mut [bool],
    ) {
        let n = l.len();
        let beta = self.kernel.params.beta;
        let z = &self.state;
        let (offsets, targets, weights) = self.kernel.net.csr();
        self.kernel.pressure(&z.x, l, &mut self.sc.pressure);
        let diag: Vec<f64> = (0..n)
            .map(|j| -beta * (1.0 - z.x[j] - z.r[j] - z.d[j]) * self.sc.pressure[j])
            .collect();
        // coefficient of κ_i in row j: −β u_i (1 − l_i) A_ij x_j
        let coef = |i: usize, e: usize, j: usize| -> f64 {
            -beta * (1.0 - z.x[i] - z.r[i] - z.d[i]) * (1.0 - l[i]) * weights[e] * z.x[j]
        };
        for j in 0..n {
            pinned[j] = capped[j] && diag[j] < 0.0;
        }
        kappa.iter_mut().for_each(|v| *v = 0.0);
        let scale = g
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        loop {
            for _ in 0..MULTIPLIER_SWEEPS {
                let mut change: f64 = 0.0;
                for j in 0..n {
                    if !pinned[j] {
                        continue;
                    }
                    let mut rhs = g[j];
                    for e in offsets[j]..offsets[j + 1] {
                        let i = targets[e];
                        if pinned[i] {
                            rhs -= coef(i, e, j) * kappa[i];
                        }
                    }
                    let next = rhs / diag[j];
                    change = change.max((next - kappa[j]).abs() * diag[j].abs());
                    kappa[j] = next;
                }
                if change <= 1e-14 * scale {
                    break;
                }
            }
            let mut dropped = false;
            for j in 0..n {
                if pinned[j] && kappa[j] < 0.0 {
                    pinned[j] = false;
                    kappa[j] = 0.0;
                    dropped = true;
                }
            }
            if !dropped {
                break;
            }
        }
    }

    /// Gradient density from already computed costates.
    pub fn gradient(
        &mut self,
        ev: &Evaluation,
        adjoint: &AdjointState,
        mult: &ConstraintMultipliers,
    ) -> Vec<f64> {
        let grid = self.problem.grid;
        let n = self.problem.n();
        let len = grid.len();
        let mut grad = vec![0.0; len * n];
        let mut src_z = Compartments::zeros(n);
        let mut src_l = vec![0.0; n];
        let mut gl_step = vec![0.0; n];
        let mut scratch = Compartments::zeros(n);
        for k in 0..len {
            self.load_state(&ev.traj, k);
            self.sources(ev, k, mult, &mut src_z, &mut src_l);
            if k + 1 < len {
                self.step_vjp(
                    ev.traj.policy().at(k),
                    grid.dt,
                    &adjoint.raw[k + 1],
                    &mut scratch,
                    &mut gl_step,
                );
            } else {
                gl_step.iter_mut().for_each(|v| *v = 0.0);
            }
            for i in 0..n {
                grad[k * n + i] = (gl_step[i] + src_l[i]) / grid.dt;
            }
        }
        grad
    }
}

/// Backward sweep of the costate system for `traj` under the multipliers.
pub fn adjoint_integrate(
    traj: &Trajectory,
    mult: &ConstraintMultipliers,
    problem: &PlannerProblem,
) -> Result<AdjointState, ControlError> {
    check_alignment(traj, mult, problem)?;
    let ev = Evaluation::new(problem, traj.clone(), mult);
    let (adj, _) = ReverseEngine::new(problem).sweep(&ev, mult, false)?;
    Ok(adj)
}

/// ∂(augmented objective)/∂l per `(grid point, agent)`, divided by dt so the
/// values are comparable to the instantaneous first-order condition:
/// discounted p∂y/∂l − w∂h/∂l plus Σ_i (μ¹_i − μ⁴_i − θ⁺_i) ∂f_i/∂l_k, with
/// θ⁺ = max(0, θ + ρ(ẋ − λ)).
pub fn control_gradient(
    traj: &Trajectory,
    adjoint: &AdjointState,
    mult: &ConstraintMultipliers,
    problem: &PlannerProblem,
) -> Result<Vec<f64>, ControlError> {
    check_alignment(traj, mult, problem)?;
    if adjoint.n != problem.n() || adjoint.grid_len != problem.grid.len() {
        return Err(ControlError::InvalidConfig(
            "adjoint does not match the problem grid".into(),
        ));
    }
    let ev = Evaluation::new(problem, traj.clone(), mult);
    Ok(ReverseEngine::new(problem).gradient(&ev, adjoint, mult))
}

fn check_alignment(
    traj: &Trajectory,
    mult: &ConstraintMultipliers,
    problem: &PlannerProblem,
) -> Result<(), ControlError> {
    let expected = problem.grid.len() * problem.n();
    if traj.n() != problem.n() || traj.grid() != problem.grid {
        return Err(ControlError::InvalidConfig(
            "trajectory does not match the problem grid".into(),
        ));
    }
    if mult.theta.len() != expected {
        return Err(ControlError::InvalidConfig(format!(
            "multipliers: expected {expected} entries, got {}",
            mult.theta.len()
        )));
    }
    Ok(())
}

/// Discretized augmented objective of a policy; used by tests as the
/// finite-difference target.
pub fn augmented_objective(
    problem: &PlannerProblem,
    policy: &LockdownPolicy,
    mult: &ConstraintMultipliers,
) -> Result<f64, ControlError> {
    Ok(evaluate(problem, policy, mult)?.augmented)
}
