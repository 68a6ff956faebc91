use std::time::Instant;

use log::{debug, info};

use crate::economy::surplus_loss_pct;
use crate::epidemic::{LockdownPolicy, Trajectory};

use super::active;
use super::precond::Preconditioner;
use super::sweep::{augmented_value, evaluate, Evaluation, ReverseEngine};
use super::{ConstraintMultipliers, ControlError, PlannerProblem, SolverConfig, SolverMethod};

/// Entries closer than this to 0 or 1 count as sitting on the bound.
const BOUND_EPS: f64 = 1e-9;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const QN_MEMORY: usize = 10;
const VIOLATION_DECAY: f64 = 0.9;
const INEXACT: f64 = 0.01;

/// First-order optimality residuals of a lockdown policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// Projected gradient of the Lagrangian: |∂L/∂l| in the interior, the
    /// wrong-signed part at l = 0 or l = 1 (per unit time).
    pub stationarity: f64,
    /// max θ·|ẋ − λ|.
    pub complementary_slackness: f64,
    /// max (ẋ − λ)₊.
    pub primal_violation: f64,
    /// min θ; negative values violate dual feasibility.
    pub min_multiplier: f64,
    pub tolerance: f64,
    pub violation_tolerance: f64,
}

impl KktReport {
    pub fn satisfied(&self) -> bool {
        self.stationarity <= self.tolerance
            && self.complementary_slackness <= self.tolerance
            && self.primal_violation <= self.violation_tolerance
            && self.min_multiplier >= 0.0
    }
}

/// Output of [`solve_optimal_lockdown`].
#[derive(Debug, Clone)]
pub struct Solution {
    pub policy: LockdownPolicy,
    pub trajectory: Trajectory,
    /// Discounted aggregate surplus.
    pub objective: f64,
    /// Surplus loss against the no-pandemic economy, in percent.
    pub loss_pct: f64,
    pub max_violation: f64,
    pub kkt: KktReport,
    pub multipliers: ConstraintMultipliers,
    /// Outer (multiplier) rounds used by the returned start.
    pub iterations: usize,
    /// Accepted projected-gradient steps of the returned start.
    pub gradient_steps: usize,
    pub converged: bool,
    /// Initial constant lockdown level of the returned start.
    pub start: f64,
}

impl Solution {
    pub fn mean_lockdown(&self) -> f64 {
        self.policy.mean()
    }

    pub fn final_mean_deaths(&self) -> f64 {
        let k = self.trajectory.len() - 1;
        self.trajectory.means_at(k)[3]
    }
}

/// Projected-gradient residual; `grad` is ascent direction of the objective.
pub(crate) fn stationarity(l: &[f64], grad: &[f64]) -> f64 {
    l.iter()
        .zip(grad)
        .map(|(&l, &g)| {
            if l <= BOUND_EPS {
                g.max(0.0)
            } else if l >= 1.0 - BOUND_EPS {
                (-g).max(0.0)
            } else {
                g.abs()
            }
        })
        .fold(0.0, f64::max)
}

struct Step {
    policy: LockdownPolicy,
    eval: Evaluation,
    first_try: bool,
}

/// Backtracking along the projected path l + ω(clip(l + α·dir) − l),
/// halving α until the augmented objective increases by the Armijo fraction
/// of the predicted gain.
#[allow(clippy::too_many_arguments)]
fn line_search(
    problem: &PlannerProblem,
    policy: &LockdownPolicy,
    eval: &Evaluation,
    grad: &[f64],
    dir: &[f64],
    mult: &ConstraintMultipliers,
    alpha: &mut f64,
    damping: f64,
) -> Result<Option<Step>, ControlError> {
    let dt = problem.grid.dt;
    let l = policy.values();
    let mut trial = policy.clone();
    for attempt in 0..MAX_BACKTRACKS {
        let mut pred = 0.0;
        for (q, t) in trial.values_mut().iter_mut().enumerate() {
            let target = (l[q] + *alpha * dir[q]).clamp(0.0, 1.0);
            *t = l[q] + damping * (target - l[q]);
            pred += grad[q] * (*t - l[q]);
        }
        pred *= dt;
        if !(pred > 0.0) {
            return Ok(None);
        }
        let ev = evaluate(problem, &trial, mult)?;
        if ev.augmented >= eval.augmented + ARMIJO * pred {
            return Ok(Some(Step {
                policy: trial,
                eval: ev,
                first_try: attempt == 0,
            }));
        }
        *alpha *= 0.5;
    }
    Ok(None)
}

/// Limited-memory inverse-Hessian model for the free (non-binding)
/// coordinates, seeded with the diagonal curvature estimate.
pub(super) struct QuasiNewton {
    memory: usize,
    pairs: Vec<(Vec<f64>, Vec<f64>)>,
}

impl QuasiNewton {
    pub fn new(memory: usize) -> Self {
        Self {
            memory,
            pairs: Vec::new(),
        }
    }

    pub fn reset(&mut self) {
        self.pairs.clear();
    }

    /// Records the step `s` and the change of the ascent gradient.
    pub fn push(&mut self, s: Vec<f64>, grad_change: Vec<f64>) {
        // minimization convention: y = −Δg
        let y: Vec<f64> = grad_change.into_iter().map(|v| -v).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        let yy: f64 = y.iter().map(|a| a * a).sum();
        if !(sy > 1e-10 * (ss * yy).sqrt()) {
            return;
        }
        if self.pairs.len() == self.memory {
            self.pairs.remove(0);
        }
        self.pairs.push((s, y));
    }

    /// Ascent direction −H(−g) restricted to `free`.
    pub fn direction(&self, grad: &[f64], pre: &Preconditioner, free: &[bool]) -> Vec<f64> {
        let dot = |a: &[f64], b: &[f64]| -> f64 {
            a.iter()
                .zip(b)
                .zip(free)
                .filter(|(_, &f)| f)
                .map(|((x, y), _)| x * y)
                .sum()
        };
        let mut q: Vec<f64> = grad
            .iter()
            .zip(free)
            .map(|(&g, &f)| if f { -g } else { 0.0 })
            .collect();
        let mut coef = Vec::with_capacity(self.pairs.len());
        for (s, y) in self.pairs.iter().rev() {
            let sy = dot(s, y);
            if !(sy > 0.0) {
                coef.push(None);
                continue;
            }
            let a = dot(s, &q) / sy;
            for ((qv, yv), &f) in q.iter_mut().zip(y).zip(free) {
                if f {
                    *qv -= a * yv;
                }
            }
            coef.push(Some((a, sy)));
        }
        let mut q = pre.solve(&q, free);
        for ((s, y), c) in self.pairs.iter().zip(coef.into_iter().rev()) {
            let Some((a, sy)) = c else { continue };
            let b = dot(y, &q) / sy;
            for ((qv, sv), &f) in q.iter_mut().zip(s).zip(free) {
                if f {
                    *qv += (a - b) * sv;
                }
            }
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

pub(super) fn free_set(l: &[f64], grad: &[f64]) -> Vec<bool> {
    l.iter()
        .zip(grad)
        .map(|(&l, &g)| !((l <= BOUND_EPS && g <= 0.0) || (l >= 1.0 - BOUND_EPS && g >= 0.0)))
        .collect()
}

pub(super) struct Candidate {
    pub policy: LockdownPolicy,
    pub eval: Evaluation,
    pub multipliers: ConstraintMultipliers,
    pub kkt: KktReport,
    pub iterations: usize,
    pub steps: usize,
}

pub(super) struct Attempt {
    pub start: f64,
    pub converged: bool,
    pub best: Option<Candidate>,
    pub last: Candidate,
}

/// Augmented-Lagrangian rounds from a constant policy, or from `warm`'s
/// policy and multipliers.
fn solve_penalty(
    problem: &PlannerProblem,
    config: &SolverConfig,
    start: f64,
    warm: Option<&Candidate>,
) -> Result<Attempt, ControlError> {
    let (len, n) = (problem.grid.len(), problem.n());
    let started = Instant::now();
    let mut mult = ConstraintMultipliers::zeros(len, n, config.rho_initial);
    let mut policy = match warm {
        Some(c) => {
            mult.theta.clone_from(&c.multipliers.theta);
            c.policy.clone()
        }
        None => LockdownPolicy::constant(len, n, start)?,
    };
    let mut eval = evaluate(problem, &policy, &mult)?;
    let mut engine = ReverseEngine::new(problem);
    let mut eta = 1.0_f64;
    let mut steps = 0;
    let mut prev_objective: Option<f64> = None;
    let mut prev_violation: Option<f64> = None;
    let mut best: Option<Candidate> = None;
    let mut last = None;

    for outer in 1..=config.max_iters {
        let mut grad;
        let mut inner = 0;
        let mut qn = QuasiNewton::new(QN_MEMORY);
        // The next multiplier update moves θ by about ρ·violation, so solving
        // the subproblem much more accurately than that is wasted work.
        let inner_tol = (0.5 * config.tol_kkt).max(INEXACT * mult.rho * eval.max_violation);
        let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
        loop {
            grad = engine
                .sweep(&eval, &mult, true)?
                .1
                .expect("gradient requested");
            if let Some((l_old, g_old)) = previous.take() {
                let s: Vec<f64> = policy
                    .values()
                    .iter()
                    .zip(&l_old)
                    .map(|(a, b)| a - b)
                    .collect();
                let dg: Vec<f64> = grad.iter().zip(&g_old).map(|(a, b)| a - b).collect();
                qn.push(s, dg);
            }
            if stationarity(policy.values(), &grad) <= inner_tol || inner == config.inner_iters {
                break;
            }
            inner += 1;
            let pre = Preconditioner::build(problem, &eval, &mult);
            let free = free_set(policy.values(), &grad);
            let dir = qn.direction(&grad, &pre, &free);
            let ascent: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
            let mut step = None;
            if ascent > 0.0 {
                let mut alpha = 1.0;
                step = line_search(problem, &policy, &eval, &grad, &dir, &mult, &mut alpha, 1.0)?;
            }
            if step.is_none() {
                // steepest scaled ascent with the sweep damping
                qn.reset();
                let dir = pre.diagonal_step(&grad);
                step = line_search(
                    problem,
                    &policy,
                    &eval,
                    &grad,
                    &dir,
                    &mult,
                    &mut eta,
                    config.damping,
                )?;
                if step.as_ref().is_some_and(|s| s.first_try) {
                    eta = (2.0 * eta).min(1e6);
                }
            }
            match step {
                Some(step) => {
                    previous = Some((policy.values().to_vec(), grad.clone()));
                    policy = step.policy;
                    eval = step.eval;
                    steps += 1;
                }
                None => break,
            }
        }

        // The augmented gradient equals the Lagrangian gradient at θ⁺.
        let res = stationarity(policy.values(), &grad);
        let mut cs: f64 = 0.0;
        for (q, theta) in mult.theta.iter_mut().enumerate() {
            let g = eval.incidence[q] - problem.lambda;
            *theta = (*theta + mult.rho * g).max(0.0);
            cs = cs.max(*theta * g.abs());
        }
        let kkt = KktReport {
            stationarity: res,
            complementary_slackness: cs,
            primal_violation: eval.max_violation,
            min_multiplier: 0.0,
            tolerance: config.tol_kkt,
            violation_tolerance: config.tol_violation,
        };
        let objective = eval.objective;
        let rel = prev_objective.map_or(f64::INFINITY, |p| {
            (objective - p).abs() / objective.abs().max(1e-300)
        });
        debug!(
            "start {start}: round {outer} J={objective:.6} viol={:.3e} stat={res:.3e} cs={cs:.3e} rho={:.1e} dJ={rel:.2e}",
            eval.max_violation, mult.rho
        );
        let candidate = || Candidate {
            policy: policy.clone(),
            eval: eval.clone(),
            multipliers: mult.clone(),
            kkt,
            iterations: outer,
            steps,
        };
        let feasible = eval.max_violation <= config.tol_violation;
        let converged = feasible && rel < config.tol_objective && kkt.satisfied();
        if converged {
            info!("start {start}: converged after {outer} rounds, {steps} steps");
            return Ok(Attempt {
                start,
                converged: true,
                best: None,
                last: candidate(),
            });
        }
        if feasible && best.as_ref().is_none_or(|b| objective > b.eval.objective) {
            best = Some(candidate());
        }
        // Locking agents down onto the cap turns any iterate into a feasible
        // policy; early rounds and hard caps rely on this fallback.
        let (repaired, _) = active::repaired_evaluation(problem, &policy, &vec![false; len * n])?;
        if repaired.max_violation <= config.tol_violation
            && best
                .as_ref()
                .is_none_or(|b| repaired.objective > b.eval.objective)
        {
            let multipliers = ConstraintMultipliers::lagrangian(mult.theta.clone());
            let kkt = lagrangian_kkt(problem, config, &repaired, &multipliers)?;
            best = Some(Candidate {
                policy: repaired.traj.policy().clone(),
                eval: repaired,
                multipliers,
                kkt,
                iterations: outer,
                steps,
            });
        }
        let out_of_time = config
            .max_seconds
            .is_some_and(|limit| started.elapsed().as_secs_f64() > limit);
        if outer == config.max_iters || out_of_time {
            last = Some(candidate());
            break;
        }
        // Raise ρ only when the multiplier update alone is not shrinking the
        // violation fast enough; a large ρ makes the inner problem stiff.
        if !feasible && prev_violation.is_none_or(|v| eval.max_violation > VIOLATION_DECAY * v) {
            mult.rho = (mult.rho * config.rho_growth).min(config.rho_max);
        }
        prev_violation = Some(eval.max_violation);
        prev_objective = Some(objective);
        eval.augmented = augmented_value(problem, &eval, &mult);
    }
    info!("start {start}: stopped without meeting the tolerances");
    Ok(Attempt {
        start,
        converged: false,
        best,
        last: last.expect("loop runs at least once"),
    })
}

fn finish(
    problem: &PlannerProblem,
    c: Candidate,
    converged: bool,
    start: f64,
) -> Result<Solution, ControlError> {
    let loss_pct = surplus_loss_pct(&c.eval.traj, &problem.econ, problem.rate)?;
    Ok(Solution {
        policy: c.policy,
        objective: c.eval.objective,
        max_violation: c.eval.max_violation,
        trajectory: c.eval.traj,
        loss_pct,
        kkt: c.kkt,
        multipliers: c.multipliers,
        iterations: c.iterations,
        gradient_steps: c.steps,
        converged,
        start,
    })
}

/// Maximizes discounted surplus subject to ẋ_i ≤ λ and 0 ≤ l ≤ 1.
///
/// Each start runs augmented-Lagrangian rounds of scaled projected-gradient
/// ascent with Armijo backtracking; the costate sweep supplies the gradient.
/// Among starts, a converged result beats an unconverged one and higher
/// surplus breaks ties. A start that never converged contributes its best
/// feasible iterate, or its last iterate if none was feasible.
pub fn solve_optimal_lockdown(
    problem: &PlannerProblem,
    config: &SolverConfig,
) -> Result<Solution, ControlError> {
    problem.validate()?;
    config.validate()?;
    let mut chosen: Option<(bool, bool, Candidate, f64)> = None;
    for &start in &config.starts {
        let attempt = match config.method {
            SolverMethod::ActiveSet => {
                active::solve_from(problem, config, start, config.max_iters)?
            }
            SolverMethod::AugmentedLagrangian => solve_penalty(problem, config, start, None)?,
        };
        let (feasible, cand) = match (attempt.converged, attempt.best) {
            (true, _) => (true, attempt.last),
            (false, Some(b)) => (true, b),
            (false, None) => (false, attempt.last),
        };
        let better = match &chosen {
            None => true,
            Some((conv, feas, prev, _)) => {
                (attempt.converged, feasible, cand.eval.objective)
                    > (*conv, *feas, prev.eval.objective)
            }
        };
        if better {
            chosen = Some((attempt.converged, feasible, cand, attempt.start));
        }
    }
    let (converged, _, cand, start) = chosen.expect("at least one start");
    finish(problem, cand, converged, start)
}

/// Recomputes the first-order conditions of `sol` from scratch with the
/// plain Lagrangian at the solution's multipliers.
pub fn verify_kkt(
    sol: &Solution,
    problem: &PlannerProblem,
    config: &SolverConfig,
) -> Result<KktReport, ControlError> {
    problem.validate()?;
    let mult = ConstraintMultipliers::lagrangian(sol.multipliers.theta.clone());
    let eval = evaluate(problem, &sol.policy, &mult)?;
    lagrangian_kkt(problem, config, &eval, &mult)
}

fn lagrangian_kkt(
    problem: &PlannerProblem,
    config: &SolverConfig,
    eval: &Evaluation,
    mult: &ConstraintMultipliers,
) -> Result<KktReport, ControlError> {
    let (_, grad) = ReverseEngine::new(problem).sweep(eval, mult, true)?;
    let grad = grad.expect("gradient requested");
    let mut cs: f64 = 0.0;
    let mut min_multiplier = f64::INFINITY;
    for (q, &theta) in mult.theta.iter().enumerate() {
        cs = cs.max(theta * (eval.incidence[q] - problem.lambda).abs());
        min_multiplier = min_multiplier.min(theta);
    }
    Ok(KktReport {
        stationarity: stationarity(eval.traj.policy().values(), &grad),
        complementary_slackness: cs,
        primal_violation: eval.max_violation,
        min_multiplier,
        tolerance: config.tol_kkt,
        violation_tolerance: config.tol_violation,
    })
}
