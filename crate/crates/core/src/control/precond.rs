//! Gauss–Newton model of the augmented objective's curvature in the
//! control, one sparse block per grid point.
//!
//! At grid point k the block is (w_k/dt)·(E_k + ρ Σ_i a_i a_iᵀ), where E_k is
//! the diagonal surplus concavity and a_i = ∂f_i/∂l(t_k) ranges over the
//! constraints currently inside the penalty. The effect of l(t_k) on later
//! states is left out, so the blocks are independent.

use super::sweep::Evaluation;
use super::{ConstraintMultipliers, PlannerProblem};

const FLOOR: f64 = 1e-8;
const CG_TOL: f64 = 1e-8;
const CG_MAX_ITER: usize = 200;

struct ActiveRow {
    /// (agent, ∂f_i/∂l_agent), own entry first.
    entries: Vec<(usize, f64)>,
}

pub(crate) struct Preconditioner {
    n: usize,
    /// Jacobi diagonal of every block.
    diag: Vec<f64>,
    /// Surplus part of the diagonal, already weighted.
    econ: Vec<f64>,
    /// ρ·w_k/dt per grid point and the active rows of that block.
    blocks: Vec<(f64, Vec<ActiveRow>)>,
}

impl Preconditioner {
    pub fn build(problem: &PlannerProblem, ev: &Evaluation, mult: &ConstraintMultipliers) -> Self {
        let grid = problem.grid;
        let n = problem.n();
        let beta = problem.epi.beta;
        let traj = &ev.traj;
        let (offsets, targets, weights) = problem.net.csr();
        let mut econ = vec![0.0; grid.len() * n];
        let mut diag = vec![0.0; grid.len() * n];
        let mut blocks = Vec::with_capacity(grid.len());
        for k in 0..grid.len() {
            let scale = grid.trapezoid_weight(k) / grid.dt;
            let (x, r, d) = (traj.x_at(k), traj.r_at(k), traj.d_at(k));
            let l = traj.policy().at(k);
            let disc = problem.rate.factor(grid.time(k));
            for i in 0..n {
                econ[k * n + i] = (-scale * disc * ev.partials[k * n + i].dll).max(FLOOR);
            }
            let weight = mult.rho * scale;
            let mut rows = Vec::new();
            if weight > 0.0 {
                for i in 0..n {
                    let q = k * n + i;
                    if mult.theta[q] + mult.rho * (ev.incidence[q] - problem.lambda) <= 0.0 {
                        continue;
                    }
                    let u = 1.0 - x[i] - r[i] - d[i];
                    let span = offsets[i]..offsets[i + 1];
                    let pressure: f64 = span
                        .clone()
                        .map(|e| weights[e] * (1.0 - l[targets[e]]) * x[targets[e]])
                        .sum();
                    let mut entries = Vec::with_capacity(span.len() + 1);
                    entries.push((i, -beta * u * pressure));
                    for e in span {
                        entries.push((
                            targets[e],
                            -beta * u * (1.0 - l[i]) * weights[e] * x[targets[e]],
                        ));
                    }
                    rows.push(ActiveRow { entries });
                }
            }
            let base = k * n;
            diag[base..base + n].copy_from_slice(&econ[base..base + n]);
            for row in &rows {
                for &(j, a) in &row.entries {
                    diag[base + j] += weight * a * a;
                }
            }
            blocks.push((weight, rows));
        }
        Self {
            n,
            diag,
            econ,
            blocks,
        }
    }

    /// Jacobi-scaled steepest ascent: g / diag.
    pub fn diagonal_step(&self, grad: &[f64]) -> Vec<f64> {
        grad.iter().zip(&self.diag).map(|(g, d)| g / d).collect()
    }

    /// Solves block-by-block B·out = rhs on the `free` coordinates; fixed
    /// coordinates of `out` are zero.
    pub fn solve(&self, rhs: &[f64], free: &[bool]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; rhs.len()];
        for (k, (weight, rows)) in self.blocks.iter().enumerate() {
            let range = k * n..(k + 1) * n;
            let mask = &free[range.clone()];
            let b = &rhs[range.clone()];
            let x = &mut out[range.clone()];
            if rows.is_empty() {
                for i in 0..n {
                    if mask[i] {
                        x[i] = b[i] / self.econ[k * n + i];
                    }
                }
                continue;
            }
            let apply = |v: &[f64], av: &mut [f64]| {
                for i in 0..n {
                    av[i] = self.econ[k * n + i] * v[i];
                }
                for row in rows {
                    let dot: f64 = row.entries.iter().map(|&(j, a)| a * v[j]).sum();
                    for &(j, a) in &row.entries {
                        av[j] += weight * a * dot;
                    }
                }
                for i in 0..n {
                    if !mask[i] {
                        av[i] = 0.0;
                    }
                }
            };
            pcg(apply, b, mask, &self.diag[range], x);
        }
        out
    }
}

/// Jacobi-preconditioned conjugate gradients on the masked coordinates.
fn pcg(apply: impl Fn(&[f64], &mut [f64]), b: &[f64], mask: &[bool], diag: &[f64], x: &mut [f64]) {
    let n = b.len();
    let mut r: Vec<f64> = (0..n).map(|i| if mask[i] { b[i] } else { 0.0 }).collect();
    let b_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return;
    }
    let mut z: Vec<f64> = (0..n).map(|i| r[i] / diag[i]).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..CG_MAX_ITER {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= CG_TOL * b_norm {
            break;
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
}
