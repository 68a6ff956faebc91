use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::epidemic::io::parse_numeric_csv;
use crate::epidemic::{EpidemicError, LockdownPolicy, TimeGrid};
use crate::netgen::CentralityVector;
use crate::stats::{pearson_test, Correlation, StatsError};

use super::Solution;

pub const POLICY_HEADER: &str = "t,agent,l";

/// Pearson correlation between each agent's time-averaged lockdown and a
/// centrality measure.
pub fn lockdown_centrality_correlation(
    policy: &LockdownPolicy,
    centrality: &CentralityVector,
) -> Result<Correlation, StatsError> {
    pearson_test(&policy.time_average(), &centrality.values)
}

pub fn policy_csv(policy: &LockdownPolicy, grid: TimeGrid) -> String {
    let mut out = String::with_capacity(policy.values().len() * 16);
    out.push_str(POLICY_HEADER);
    out.push('\n');
    for k in 0..policy.grid_len() {
        let t = grid.time(k);
        for (i, l) in policy.at(k).iter().enumerate() {
            let _ = writeln!(out, "{t},{i},{l}");
        }
    }
    out
}

/// Headline numbers of a solve, serialized as the optimizer's summary JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub lambda: f64,
    pub objective: f64,
    pub loss_pct: f64,
    pub mean_lockdown: f64,
    pub final_mean_deaths: f64,
    pub max_violation: f64,
    pub stationarity: f64,
    pub complementary_slackness: f64,
    pub iterations: usize,
    pub gradient_steps: usize,
    pub converged: bool,
    pub start: f64,
}

impl SolutionSummary {
    pub fn new(sol: &Solution, lambda: f64) -> Self {
        Self {
            lambda,
            objective: sol.objective,
            loss_pct: sol.loss_pct,
            mean_lockdown: sol.mean_lockdown(),
            final_mean_deaths: sol.final_mean_deaths(),
            max_violation: sol.max_violation,
            stationarity: sol.kkt.stationarity,
            complementary_slackness: sol.kkt.complementary_slackness,
            iterations: sol.iterations,
            gradient_steps: sol.gradient_steps,
            converged: sol.converged,
            start: sol.start,
        }
    }
}

/// Reads a policy written by [`policy_csv`] back onto `grid` for `n` agents.
/// Rows may come in any order but every `(grid point, agent)` must appear
/// exactly once.
pub fn parse_policy_csv(
    text: &str,
    grid: TimeGrid,
    n: usize,
) -> Result<LockdownPolicy, EpidemicError> {
    let rows = parse_numeric_csv(text, POLICY_HEADER)?;
    let len = grid.len();
    let mut values = vec![f64::NAN; len * n];
    for (idx, row) in rows.iter().enumerate() {
        let fail = |reason: String| EpidemicError::Parse {
            line: idx + 2,
            reason,
        };
        let k = grid
            .index_of(row[0])
            .ok_or_else(|| fail(format!("time {} is not on the grid", row[0])))?;
        let agent = row[1];
        if !(agent >= 0.0 && agent.fract() == 0.0 && (agent as usize) < n) {
            return Err(fail(format!("agent {agent} out of range for n = {n}")));
        }
        let q = k * n + agent as usize;
        if !values[q].is_nan() {
            return Err(fail(format!(
                "duplicate entry for t = {}, agent {agent}",
                row[0]
            )));
        }
        values[q] = row[2];
    }
    if let Some(q) = values.iter().position(|v| v.is_nan()) {
        return Err(EpidemicError::Parse {
            line: rows.len() + 1,
            reason: format!(
                "missing entry for t = {}, agent {}",
                grid.time(q / n),
                q % n
            ),
        });
    }
    LockdownPolicy::from_values(len, n, values)
}
