//! Simulated minimum-distance estimation of the incidence cap λ from an
//! observed death series.
//!
//! For each candidate λ the planner's problem is solved, the model's deaths
//! are sampled once a day and compared with the target by the sum of squared
//! differences. The search is a coarse grid (log-spaced when the lower end is
//! positive) followed by golden-section refinement around the grid minimum.

use std::fmt::Write as _;
use std::path::Path;

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{solve_optimal_lockdown, ControlError, PlannerProblem, SolverConfig};
use crate::economy::AgentEconomy;
use crate::epidemic::io::parse_numeric_csv;
use crate::epidemic::{EpidemicError, EpidemicParams, Trajectory};

pub const TARGET_HEADER: &str = "day,deaths";

/// Infectious period in days behind the state-input mapping.
const INFECTIOUS_DAYS: f64 = 18.0;
const STATE_DISCOUNT: f64 = 0.05 / 365.0;
const INV_PHI: f64 = 0.618_033_988_749_894_8;
/// Minimum relative improvement over the endpoints for λ to count as
/// identified.
const IDENTIFICATION_GAIN: f64 = 0.01;

#[derive(Debug, Error)]
pub enum CalibrateError {
    #[error("invalid `{name}`: {reason}")]
    InvalidInput { name: &'static str, reason: String },
    #[error("target line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("series length mismatch: model {model}, target {target}")]
    LengthMismatch { model: usize, target: usize },
    #[error("solve at lambda = {lambda} failed: {source}")]
    Solve {
        lambda: f64,
        #[source]
        source: ControlError,
    },
    #[error("solve at lambda = {lambda} ended infeasible (violation {violation:.3e})")]
    Infeasible { lambda: f64, violation: f64 },
    #[error("all {count} evaluations failed; first error: {first}")]
    AllFailed { count: usize, first: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

impl CalibrateError {
    pub fn is_numerical(&self) -> bool {
        match self {
            CalibrateError::Solve { source, .. } => source.is_numerical(),
            CalibrateError::Infeasible { .. } | CalibrateError::AllFailed { .. } => true,
            _ => false,
        }
    }
}

/// Whether a series holds running totals or per-day counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    #[default]
    Cumulative,
    Incident,
}

/// Observed deaths on days 1..m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    pub daily_deaths: Vec<f64>,
    pub kind: SeriesKind,
    /// Maps the model's mean death probability to observed counts.
    pub population_scale: f64,
}

impl CalibrationTarget {
    pub fn new(
        daily_deaths: Vec<f64>,
        kind: SeriesKind,
        population_scale: f64,
    ) -> Result<Self, CalibrateError> {
        let target = Self {
            daily_deaths,
            kind,
            population_scale,
        };
        target.validate()?;
        Ok(target)
    }

    pub fn validate(&self) -> Result<(), CalibrateError> {
        if self.daily_deaths.len() < 2 {
            return Err(CalibrateError::InvalidInput {
                name: "daily_deaths",
                reason: format!("need at least 2 days, got {}", self.daily_deaths.len()),
            });
        }
        if let Some(v) = self
            .daily_deaths
            .iter()
            .find(|v| !(v.is_finite() && **v >= 0.0))
        {
            return Err(CalibrateError::InvalidInput {
                name: "daily_deaths",
                reason: format!("entries must be finite and non-negative, got {v}"),
            });
        }
        if self.kind == SeriesKind::Cumulative {
            if let Some(w) = self.daily_deaths.windows(2).position(|w| w[1] < w[0]) {
                return Err(CalibrateError::InvalidInput {
                    name: "daily_deaths",
                    reason: format!("cumulative series decreases after day {}", w + 1),
                });
            }
        }
        if !(self.population_scale.is_finite() && self.population_scale > 0.0) {
            return Err(CalibrateError::InvalidInput {
                name: "population_scale",
                reason: format!("must be positive, got {}", self.population_scale),
            });
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.daily_deaths.len()
    }

    /// Parses a `day,deaths` CSV with days 1..m in order. Every count is
    /// multiplied by `death_multiplier` (the share of reported deaths
    /// attributed to the modeled population).
    pub fn parse_csv(
        text: &str,
        kind: SeriesKind,
        population_scale: f64,
        death_multiplier: f64,
    ) -> Result<Self, CalibrateError> {
        if !(death_multiplier.is_finite() && death_multiplier > 0.0) {
            return Err(CalibrateError::InvalidInput {
                name: "death_multiplier",
                reason: format!("must be positive, got {death_multiplier}"),
            });
        }
        let rows = parse_numeric_csv(text, TARGET_HEADER).map_err(|e| match e {
            EpidemicError::Parse { line, reason } => CalibrateError::Parse { line, reason },
            other => CalibrateError::Parse {
                line: 0,
                reason: other.to_string(),
            },
        })?;
        // Map row index back to its line, skipping blank lines like the parser does.
        let lines: Vec<usize> = text
            .lines()
            .enumerate()
            .skip(1)
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, _)| i + 1)
            .collect();
        let mut deaths = Vec::with_capacity(rows.len());
        for (idx, row) in rows.iter().enumerate() {
            let expected = (idx + 1) as f64;
            if row[0] != expected {
                return Err(CalibrateError::Parse {
                    line: lines[idx],
                    reason: format!("expected day {expected}, got {}", row[0]),
                });
            }
            if !(row[1].is_finite() && row[1] >= 0.0) {
                return Err(CalibrateError::Parse {
                    line: lines[idx],
                    reason: format!("deaths must be non-negative, got {}", row[1]),
                });
            }
            deaths.push(row[1] * death_multiplier);
        }
        Self::new(deaths, kind, population_scale)
    }

    pub fn read_csv(
        path: &Path,
        kind: SeriesKind,
        population_scale: f64,
        death_multiplier: f64,
    ) -> Result<Self, CalibrateError> {
        let text = std::fs::read_to_string(path).map_err(|e| CalibrateError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse_csv(&text, kind, population_scale, death_multiplier)
    }

    /// `day,deaths` CSV of the stored (already multiplied) series.
    pub fn to_csv(&self) -> String {
        series_csv(&self.daily_deaths)
    }
}

pub fn series_csv(series: &[f64]) -> String {
    let mut out = String::from(TARGET_HEADER);
    out.push('\n');
    for (day, v) in series.iter().enumerate() {
        let _ = writeln!(out, "{},{v}", day + 1);
    }
    out
}

/// One objective evaluation of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub lambda: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub lambda_hat: f64,
    pub objective: f64,
    /// False when the best distance beats both interval ends by less than
    /// 1% — the objective is flat in λ.
    pub identified: bool,
    /// Grid evaluations in grid order, then the refinement steps.
    pub trace: Vec<TracePoint>,
}

impl CalibrationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration report serializes")
    }
}

/// Search interval and refinement settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LambdaSearch {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub grid_points: usize,
    /// Stop refining once the bracket is narrower than this.
    pub width_tol: f64,
    pub max_refinements: usize,
}

impl Default for LambdaSearch {
    fn default() -> Self {
        Self {
            lambda_min: 1e-4,
            lambda_max: 1.0,
            grid_points: 25,
            width_tol: 1e-4,
            max_refinements: 40,
        }
    }
}

impl LambdaSearch {
    pub fn validate(&self) -> Result<(), CalibrateError> {
        if !(self.lambda_min >= 0.0
            && self.lambda_min < self.lambda_max
            && self.lambda_max.is_finite())
        {
            return Err(CalibrateError::InvalidInput {
                name: "lambda_min",
                reason: format!(
                    "need 0 <= lambda_min < lambda_max, got [{}, {}]",
                    self.lambda_min, self.lambda_max
                ),
            });
        }
        if self.grid_points < 5 {
            return Err(CalibrateError::InvalidInput {
                name: "grid_points",
                reason: format!("need at least 5, got {}", self.grid_points),
            });
        }
        if !(self.width_tol > 0.0) {
            return Err(CalibrateError::InvalidInput {
                name: "width_tol",
                reason: format!("must be positive, got {}", self.width_tol),
            });
        }
        Ok(())
    }

    /// Log-spaced when `lambda_min > 0`, otherwise evenly spaced.
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi, m) = (self.lambda_min, self.lambda_max, self.grid_points);
        let mut pts: Vec<f64> = (0..m)
            .map(|i| {
                let f = i as f64 / (m - 1) as f64;
                if lo > 0.0 {
                    (lo.ln() + f * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + f * (hi - lo)
                }
            })
            .collect();
        pts[0] = lo;
        pts[m - 1] = hi;
        pts
    }
}

/// scale·(mean d) on days 1..m; incident mode differences against day 0.
pub fn death_series(
    traj: &Trajectory,
    m: usize,
    scale: f64,
    kind: SeriesKind,
) -> Result<Vec<f64>, CalibrateError> {
    let grid = traj.grid();
    let mean_d = traj.mean_death_series();
    let mut out = Vec::with_capacity(m);
    let mut prev = scale * mean_d[0];
    for day in 1..=m {
        let k = grid
            .index_of(day as f64)
            .ok_or_else(|| CalibrateError::InvalidInput {
                name: "m",
                reason: format!(
                    "day {day} is not on the time grid (horizon {}, dt {})",
                    grid.horizon(),
                    grid.dt
                ),
            })?;
        let cum = scale * mean_d[k];
        out.push(match kind {
            SeriesKind::Cumulative => cum,
            SeriesKind::Incident => cum - prev,
        });
        prev = cum;
    }
    Ok(out)
}

fn solve_trajectory(
    problem: &PlannerProblem,
    solver: &SolverConfig,
) -> Result<Trajectory, CalibrateError> {
    let lambda = problem.lambda;
    let sol = solve_optimal_lockdown(problem, solver)
        .map_err(|source| CalibrateError::Solve { lambda, source })?;
    if !sol.converged {
        if sol.max_violation > solver.tol_violation {
            return Err(CalibrateError::Infeasible {
                lambda,
                violation: sol.max_violation,
            });
        }
        info!(
            "lambda = {lambda}: solver stopped before convergence (stationarity {:.2e}); using its feasible policy",
            sol.kkt.stationarity
        );
    }
    Ok(sol.trajectory)
}

/// Solves the planner's problem at `problem.lambda` and returns the model's
/// cumulative deaths, scale·mean d, on days 1..m.
///
/// A solve that stops early with a feasible policy is accepted (and
/// logged); an infeasible one is an error naming λ.
pub fn simulate_death_series(
    problem: &PlannerProblem,
    solver: &SolverConfig,
    m: usize,
    scale: f64,
) -> Result<Vec<f64>, CalibrateError> {
    check_horizon(problem, m)?;
    let traj = solve_trajectory(problem, solver)?;
    death_series(&traj, m, scale, SeriesKind::Cumulative)
}

fn check_horizon(problem: &PlannerProblem, m: usize) -> Result<(), CalibrateError> {
    if (m as f64) > problem.grid.horizon() + 1e-9 {
        return Err(CalibrateError::InvalidInput {
            name: "m",
            reason: format!("{m} days exceed the horizon {}", problem.grid.horizon()),
        });
    }
    Ok(())
}

/// Σ (model_t − target_t)².
pub fn distance(model: &[f64], target: &CalibrationTarget) -> Result<f64, CalibrateError> {
    if model.len() != target.m() {
        return Err(CalibrateError::LengthMismatch {
            model: model.len(),
            target: target.m(),
        });
    }
    Ok(model
        .iter()
        .zip(&target.daily_deaths)
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

fn objective(
    target: &CalibrationTarget,
    base: &PlannerProblem,
    solver: &SolverConfig,
    lambda: f64,
) -> Result<f64, CalibrateError> {
    let traj = solve_trajectory(&base.with_lambda(lambda), solver)?;
    let model = death_series(&traj, target.m(), target.population_scale, target.kind)?;
    let d = distance(&model, target)?;
    debug!("lambda = {lambda:.6e}: distance {d:.6e}");
    Ok(d)
}

/// λ̂ minimizing the distance between the model's and the target's deaths.
///
/// Grid evaluations run in parallel; refinement is sequential. Failed
/// evaluations are skipped (logged) unless every grid point fails.
pub fn estimate_lambda(
    target: &CalibrationTarget,
    base_problem: &PlannerProblem,
    search: &LambdaSearch,
    solver: &SolverConfig,
) -> Result<CalibrationResult, CalibrateError> {
    target.validate()?;
    search.validate()?;
    base_problem
        .validate()
        .map_err(|source| CalibrateError::Solve {
            lambda: base_problem.lambda,
            source,
        })?;
    check_horizon(base_problem, target.m())?;

    let grid = search.grid();
    let results: Vec<Result<f64, CalibrateError>> = grid
        .par_iter()
        .map(|&lambda| objective(target, base_problem, solver, lambda))
        .collect();

    let mut trace = Vec::new();
    let mut values = vec![f64::INFINITY; grid.len()];
    let mut first_error = None;
    for (i, (&lambda, res)) in grid.iter().zip(results).enumerate() {
        match res {
            Ok(d) => {
                values[i] = d;
                trace.push(TracePoint {
                    lambda,
                    distance: d,
                });
            }
            Err(e) => {
                warn!("skipping lambda = {lambda}: {e}");
                first_error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if trace.is_empty() {
        return Err(CalibrateError::AllFailed {
            count: grid.len(),
            first: first_error.unwrap_or_default(),
        });
    }

    // First minimum on ties keeps the result deterministic.
    let best_idx = (0..grid.len()).fold(0, |b, i| if values[i] < values[b] { i } else { b });
    let mut best = TracePoint {
        lambda: grid[best_idx],
        distance: values[best_idx],
    };
    let mut a = grid[best_idx.saturating_sub(1)];
    let mut b = grid[(best_idx + 1).min(grid.len() - 1)];

    let eval = |lambda: f64, trace: &mut Vec<TracePoint>, best: &mut TracePoint| -> f64 {
        match objective(target, base_problem, solver, lambda) {
            Ok(d) => {
                trace.push(TracePoint {
                    lambda,
                    distance: d,
                });
                if d < best.distance {
                    *best = TracePoint {
                        lambda,
                        distance: d,
                    };
                }
                d
            }
            Err(e) => {
                warn!("refinement at lambda = {lambda} failed: {e}");
                f64::INFINITY
            }
        }
    };

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut steps = 0;
    if b - a > search.width_tol && search.max_refinements > 0 {
        let mut fc = eval(c, &mut trace, &mut best);
        let mut fd = eval(d, &mut trace, &mut best);
        steps = 2;
        while b - a > search.width_tol && steps < search.max_refinements {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = eval(c, &mut trace, &mut best);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = eval(d, &mut trace, &mut best);
            }
            steps += 1;
        }
    }
    debug!("golden section: {steps} evaluations, final bracket [{a:.6e}, {b:.6e}]");

    let ends = values[0].min(values[grid.len() - 1]);
    let identified = ends.is_finite() && best.distance < ends * (1.0 - IDENTIFICATION_GAIN);
    Ok(CalibrationResult {
        lambda_hat: best.lambda,
        objective: best.distance,
        identified,
        trace,
    })
}

/// Epidemic and economic parameters of a population from its reproduction
/// number, death-per-case ratio and production inputs.
///
/// β = R0/18, γ = (1 − dpc)/18, κ = dpc/18, k = beds, φ = 0, ψ = 1; the
/// matching discount rate is [`state_discount_rate`].
pub fn params_from_state_inputs(
    r0_estimate: f64,
    death_per_case: f64,
    price: f64,
    wage: f64,
    alpha: f64,
    beds: f64,
) -> Result<(EpidemicParams, AgentEconomy), CalibrateError> {
    let check = |name: &'static str, ok: bool, value: f64, range: &str| {
        if ok {
            Ok(())
        } else {
            Err(CalibrateError::InvalidInput {
                name,
                reason: format!("must be {range}, got {value}"),
            })
        }
    };
    check(
        "r0_estimate",
        r0_estimate.is_finite() && r0_estimate > 0.0,
        r0_estimate,
        "positive",
    )?;
    check(
        "death_per_case",
        death_per_case > 0.0 && death_per_case < 1.0,
        death_per_case,
        "in (0, 1)",
    )?;
    check("price", price.is_finite() && price > 0.0, price, "positive")?;
    check("wage", wage.is_finite() && wage > 0.0, wage, "positive")?;
    check("alpha", alpha > 0.0 && alpha < 1.0, alpha, "in (0, 1)")?;
    check("beds", beds.is_finite() && beds > 0.0, beds, "positive")?;
    let epi = EpidemicParams::new(
        r0_estimate / INFECTIOUS_DAYS,
        (1.0 - death_per_case) / INFECTIOUS_DAYS,
        death_per_case / INFECTIOUS_DAYS,
    )
    .map_err(|e| CalibrateError::InvalidInput {
        name: "r0_estimate",
        reason: e.to_string(),
    })?;
    let econ = AgentEconomy {
        p: price,
        w: wage,
        k: beds,
        alpha,
        phi: 0.0,
        psi: 1.0,
    };
    Ok((epi, econ))
}

/// Daily discount rate paired with [`params_from_state_inputs`], 0.05/365.
pub fn state_discount_rate() -> f64 {
    STATE_DISCOUNT
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let t = CalibrationTarget::new(vec![1.0, 2.0, 3.0], SeriesKind::Cumulative, 1.0).unwrap();
        assert_eq!(distance(&[1.0, 2.0, 3.0], &t).unwrap(), 0.0);
        assert_eq!(distance(&[2.0, 3.0, 4.0], &t).unwrap(), 3.0);
        let t = CalibrationTarget::new(vec![2.0, 1.0], SeriesKind::Incident, 1.0).unwrap();
        assert_eq!(distance(&[1.0, 2.0], &t).unwrap(), 2.0);
        assert!(matches!(
            distance(&[1.0], &t),
            Err(CalibrateError::LengthMismatch {
                model: 1,
                target: 2
            })
        ));
    }

    #[test]
    fn state_mapping() {
        let (epi, econ) = params_from_state_inputs(3.6, 0.2, 1.2, 0.4, 1.0 / 3.0, 1.0).unwrap();
        assert!((epi.beta - 0.2).abs() < 1e-15);
        assert!((epi.gamma - 0.8 / 18.0).abs() < 1e-15);
        assert!((epi.kappa - 0.2 / 18.0).abs() < 1e-15);
        assert_eq!(econ, AgentEconomy::default());
        let (epi, _) = params_from_state_inputs(2.0, 0.5, 1.0, 1.0, 0.5, 10.0).unwrap();
        assert!((epi.gamma - 1.0 / 36.0).abs() < 1e-15 && (epi.kappa - 1.0 / 36.0).abs() < 1e-15);
        for bad in [(0.0, 0.2), (3.6, 0.0), (3.6, 1.0)] {
            assert!(params_from_state_inputs(bad.0, bad.1, 1.0, 1.0, 0.5, 1.0).is_err());
        }
        assert!(params_from_state_inputs(3.6, 0.2, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(params_from_state_inputs(3.6, 0.2, 1.0, 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn target_csv_errors_name_the_line() {
        let err = CalibrationTarget::parse_csv(
            "day,deaths\n1,0\n2,x\n",
            SeriesKind::Cumulative,
            1.0,
            1.0,
        )
        .unwrap_err();
        assert!(
            matches!(err, CalibrateError::Parse { line: 3, .. }),
            "{err}"
        );
        let err = CalibrationTarget::parse_csv(
            "day,deaths\n1,0\n\n3,1\n",
            SeriesKind::Cumulative,
            1.0,
            1.0,
        )
        .unwrap_err();
        assert!(
            matches!(err, CalibrateError::Parse { line: 4, .. }),
            "{err}"
        );
        let err = CalibrationTarget::parse_csv("d,deaths\n1,0\n", SeriesKind::Cumulative, 1.0, 1.0)
            .unwrap_err();
        assert!(matches!(err, CalibrateError::Parse { line: 1, .. }));
        let t = CalibrationTarget::parse_csv(
            "day,deaths\n1,10\n2,20\n",
            SeriesKind::Cumulative,
            5.0,
            0.8,
        )
        .unwrap();
        assert_eq!(t.daily_deaths, vec![8.0, 16.0]);
    }

    #[test]
    fn grid_is_log_spaced() {
        let g = LambdaSearch::default().grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[24], 1.0);
        assert!((g[6] - 1e-3).abs() < 1e-15);
        let lin = LambdaSearch {
            lambda_min: 0.0,
            grid_points: 5,
            ..Default::default()
        }
        .grid();
        assert_eq!(lin, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
