//! Feasible-direction method: the incidence cap is never violated because the
//! forward pass locks agents down just enough to sit on it.
//!
//! Every iterate carries a working set of (grid point, agent) entries held on
//! the cap: during the forward pass their lockdown is whatever puts ẋ_i
//! exactly at λ given the neighbours. Every other entry applies its desired
//! level u_i, raised to the cap level if u_i would overshoot; raised entries
//! join the working set. The working set's multipliers follow from
//! stationarity in its own coordinates, which eliminates it from the
//! gradient, and entries whose multiplier comes out negative are released.

use std::time::Instant;

use log::{debug, info};

use crate::epidemic::{integrate_feedback, Kernel, LockdownPolicy};

use super::precond::Preconditioner;
use super::solver::{free_set, stationarity, Attempt, Candidate, KktReport, QuasiNewton};
use super::sweep::{Evaluation, Reduced, ReverseEngine};
use super::{ConstraintMultipliers, ControlError, PlannerProblem, SolverConfig};

const REPAIR_SWEEPS: usize = 200;
const REPAIR_TOL: f64 = 1e-14;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;
const QN_MEMORY: usize = 10;

/// Forward pass from the desired policy with the `held` entries on the cap.
/// Returns the evaluation of the applied policy and the entries on the cap.
pub(crate) fn repaired_evaluation(
    problem: &PlannerProblem,
    desired: &LockdownPolicy,
    held: &[bool],
) -> Result<(Evaluation, Vec<bool>), ControlError> {
    let n = problem.n();
    let kernel = Kernel::new(&problem.net, problem.epi);
    let beta = problem.epi.beta;
    let removal = problem.epi.removal_rate();
    let lambda = problem.lambda;
    let (offsets, targets, weights) = problem.net.csr();
    let mut capped = vec![false; desired.values().len()];
    let mut needed = vec![0.0; n];
    let traj = integrate_feedback(
        &kernel,
        desired,
        &problem.initial,
        problem.grid,
        |k, z, l| {
            let u = desired.at(k);
            let held = &held[k * n..(k + 1) * n];
            for _ in 0..REPAIR_SWEEPS {
                let mut change: f64 = 0.0;
                for i in 0..n {
                    let mut pressure = 0.0;
                    for e in offsets[i]..offsets[i + 1] {
                        let j = targets[e];
                        pressure += weights[e] * (1.0 - l[j]) * z.x[j];
                    }
                    let push = beta * z.s[i] * pressure;
                    needed[i] = if push > 0.0 {
                        1.0 - (lambda + removal * z.x[i]) / push
                    } else {
                        f64::NEG_INFINITY
                    };
                    let floor = if held[i] { 0.0 } else { u[i] };
                    let next = floor.max(needed[i]).min(1.0);
                    change = change.max((next - l[i]).abs());
                    l[i] = next;
                }
                if change <= REPAIR_TOL {
                    break;
                }
            }
            for i in 0..n {
                capped[k * n + i] = needed[i] >= 0.0 && (held[i] || needed[i] > u[i]);
            }
        },
    )?;
    let mult = ConstraintMultipliers::zeros(problem.grid.len(), n, 0.0);
    Ok((Evaluation::new(problem, traj, &mult), capped))
}

struct Iterate {
    eval: Evaluation,
    reduced: Reduced,
}

impl Iterate {
    fn new(
        problem: &PlannerProblem,
        engine: &mut ReverseEngine<'_>,
        desired: &LockdownPolicy,
        held: &[bool],
    ) -> Result<Self, ControlError> {
        let (eval, capped) = repaired_evaluation(problem, desired, held)?;
        Self::from_parts(engine, eval, &capped)
    }

    fn from_parts(
        engine: &mut ReverseEngine<'_>,
        eval: Evaluation,
        capped: &[bool],
    ) -> Result<Self, ControlError> {
        let reduced = engine.sweep_reduced(&eval, capped)?;
        Ok(Self { eval, reduced })
    }

    fn applied(&self) -> &[f64] {
        self.eval.traj.policy().values()
    }

    /// Entries that stay on the cap in the next forward pass.
    fn held(&self) -> &[bool] {
        &self.reduced.pinned
    }

    fn kkt(&self, problem: &PlannerProblem, config: &SolverConfig) -> KktReport {
        let mut cs: f64 = 0.0;
        for (q, &theta) in self.reduced.theta.iter().enumerate() {
            cs = cs.max(theta * (self.eval.incidence[q] - problem.lambda).abs());
        }
        KktReport {
            stationarity: stationarity(self.applied(), &self.reduced.grad),
            complementary_slackness: cs,
            primal_violation: self.eval.max_violation,
            min_multiplier: 0.0,
            tolerance: config.tol_kkt,
            violation_tolerance: config.tol_violation,
        }
    }
}

/// Armijo backtracking on u = clip(l + α·dir) with `held` entries on the
/// cap. The predicted gain is taken along the applied change, since entries
/// driven into the cap stop there.
fn line_search(
    problem: &PlannerProblem,
    engine: &mut ReverseEngine<'_>,
    it: &Iterate,
    dir: &[f64],
    held: &[bool],
    alpha: &mut f64,
) -> Result<Option<(Iterate, bool)>, ControlError> {
    let dt = problem.grid.dt;
    let l = it.applied();
    let grad = &it.reduced.grad;
    let mut trial = it.eval.traj.policy().clone();
    let extra = held.iter().zip(it.held()).any(|(a, b)| a != b);
    for attempt in 0..MAX_BACKTRACKS {
        let mut moved = extra;
        for (q, t) in trial.values_mut().iter_mut().enumerate() {
            *t = (l[q] + *alpha * dir[q]).clamp(0.0, 1.0);
            moved |= *t != l[q];
        }
        if !moved {
            return Ok(None);
        }
        let (eval, capped) = repaired_evaluation(problem, &trial, held)?;
        let applied = eval.traj.policy().values();
        let pred = dt
            * (0..l.len())
                .map(|q| grad[q] * (applied[q] - l[q]))
                .sum::<f64>();
        if pred > 0.0 && eval.objective >= it.eval.objective + ARMIJO * pred {
            let next = Iterate::from_parts(engine, eval, &capped)?;
            return Ok(Some((next, attempt == 0)));
        }
        *alpha *= 0.5;
    }
    Ok(None)
}

pub(crate) fn solve_from(
    problem: &PlannerProblem,
    config: &SolverConfig,
    start: f64,
    max_steps: usize,
) -> Result<Attempt, ControlError> {
    let (len, n) = (problem.grid.len(), problem.n());
    let started = Instant::now();
    let mut engine = ReverseEngine::new(problem);
    let initial = LockdownPolicy::constant(len, n, start)?;
    let mut it = Iterate::new(problem, &mut engine, &initial, &vec![false; len * n])?;
    let no_penalty = ConstraintMultipliers::zeros(len, n, 0.0);
    let mut qn = QuasiNewton::new(QN_MEMORY);
    let mut eta = 1.0_f64;
    let mut steps = 0;
    let candidate = |it: &Iterate, kkt: KktReport, steps: usize| Candidate {
        policy: it.eval.traj.policy().clone(),
        eval: it.eval.clone(),
        multipliers: ConstraintMultipliers::lagrangian(it.reduced.theta.clone()),
        kkt,
        iterations: steps,
        steps,
    };
    loop {
        let kkt = it.kkt(problem, config);
        let free: Vec<bool> = free_set(it.applied(), &it.reduced.grad)
            .into_iter()
            .zip(it.held())
            .map(|(f, &p)| f && !p)
            .collect();
        let pre = Preconditioner::build(problem, &it.eval, &no_penalty);
        let mut dir = qn.direction(&it.reduced.grad, &pre, &free);
        let ascent: f64 = dir.iter().zip(&it.reduced.grad).map(|(d, g)| d * g).sum();
        let mut step = None;
        if ascent > 0.0 {
            let mut alpha = 1.0;
            step = line_search(problem, &mut engine, &it, &dir, it.held(), &mut alpha)?
                .map(|(s, _)| s);
        }
        if step.is_none() {
            qn.reset();
            dir = pre.solve(&it.reduced.grad, &free);
            if let Some((s, first)) =
                line_search(problem, &mut engine, &it, &dir, it.held(), &mut eta)?
            {
                if first {
                    eta = (2.0 * eta).min(1e6);
                }
                step = Some(s);
            }
        }
        let Some(next) = step else {
            let converged = kkt.satisfied();
            info!("start {start}: no ascent step after {steps} steps (converged: {converged})");
            return Ok(Attempt {
                start,
                converged,
                best: (kkt.primal_violation <= config.tol_violation)
                    .then(|| candidate(&it, kkt, steps)),
                last: candidate(&it, kkt, steps),
            });
        };
        steps += 1;
        let rel =
            (next.eval.objective - it.eval.objective).abs() / it.eval.objective.abs().max(1e-300);
        let s: Vec<f64> = next
            .applied()
            .iter()
            .zip(it.applied())
            .map(|(a, b)| a - b)
            .collect();
        let dg: Vec<f64> = next
            .reduced
            .grad
            .iter()
            .zip(&it.reduced.grad)
            .map(|(a, b)| a - b)
            .collect();
        qn.push(s, dg);
        it = next;
        let kkt = it.kkt(problem, config);
        debug!(
            "start {start}: step {steps} J={:.8} stat={:.3e} held={} dJ={rel:.2e}",
            it.eval.objective,
            kkt.stationarity,
            it.held().iter().filter(|&&p| p).count()
        );
        if kkt.satisfied() && rel < config.tol_objective {
            info!("start {start}: converged after {steps} steps");
            return Ok(Attempt {
                start,
                converged: true,
                best: None,
                last: candidate(&it, kkt, steps),
            });
        }
        let out_of_time = config
            .max_seconds
            .is_some_and(|limit| started.elapsed().as_secs_f64() > limit);
        if steps >= max_steps || out_of_time {
            info!("start {start}: stopped after {steps} steps without meeting the tolerances");
            return Ok(Attempt {
                start,
                converged: false,
                best: (kkt.primal_violation <= config.tol_violation)
                    .then(|| candidate(&it, kkt, steps)),
                last: candidate(&it, kkt, steps),
            });
        }
    }
}
