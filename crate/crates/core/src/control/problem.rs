use serde::{Deserialize, Serialize};

use crate::economy::{DiscountRate, Economy};
use crate::epidemic::{EpidemicParams, HealthState, TimeGrid};
use crate::netgen::Network;

use super::ControlError;

/// Incidence-capped surplus maximization on a fixed network.
#[derive(Debug, Clone)]
pub struct PlannerProblem {
    pub net: Network,
    pub epi: EpidemicParams,
    pub econ: Economy,
    pub rate: DiscountRate,
    /// Cap λ on every agent's ẋ_i.
    pub lambda: f64,
    pub initial: HealthState,
    pub grid: TimeGrid,
}

impl PlannerProblem {
    pub fn validate(&self) -> Result<(), ControlError> {
        let n = self.net.n();
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(ControlError::InvalidConfig(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        if self.econ.n() != n || self.initial.n() != n {
            return Err(ControlError::InvalidConfig(format!(
                "dimension mismatch: network {n}, economy {}, initial state {}",
                self.econ.n(),
                self.initial.n()
            )));
        }
        self.epi.validate()?;
        self.initial.validate()?;
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }
}

/// How the incidence cap is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    /// Penalty rounds with multiplier updates; the cap holds only in the
    /// limit, so each round's iterate is also repaired onto the cap as a
    /// feasible fallback.
    #[default]
    AugmentedLagrangian,
    /// Feasible directions: the forward pass locks agents down onto the cap
    /// and the capped entries are eliminated from the gradient. Fast and
    /// always feasible, but rarely meets the stationarity tolerance.
    ActiveSet,
}

/// Forward–backward sweep and augmented-Lagrangian settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative objective change between outer rounds.
    pub tol_objective: f64,
    /// Allowed (ẋ − λ)₊ on the grid.
    pub tol_violation: f64,
    /// Stationarity and complementary-slackness tolerance.
    pub tol_kkt: f64,
    /// Outer (multiplier) rounds per start.
    pub max_iters: usize,
    /// Projected-gradient steps per outer round.
    pub inner_iters: usize,
    pub rho_initial: f64,
    pub rho_growth: f64,
    pub rho_max: f64,
    /// Fraction of the projected step taken per update.
    pub damping: f64,
    /// Constant initial lockdown levels, one solve each; the best feasible
    /// result wins.
    pub starts: Vec<f64>,
    /// Wall-clock limit per start; the best iterate so far is returned.
    pub max_seconds: Option<f64>,
    pub method: SolverMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_objective: 1e-6,
            tol_violation: 1e-4,
            tol_kkt: 1e-3,
            max_iters: 500,
            inner_iters: 60,
            rho_initial: 10.0,
            rho_growth: 2.0,
            rho_max: 1e6,
            damping: 0.5,
            starts: vec![0.0, 0.5, 1.0],
            max_seconds: None,
            method: SolverMethod::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        let positive = [
            ("tol_objective", self.tol_objective),
            ("tol_violation", self.tol_violation),
            ("tol_kkt", self.tol_kkt),
            ("rho_initial", self.rho_initial),
            ("rho_max", self.rho_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ControlError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.rho_growth >= 1.0) {
            return Err(ControlError::InvalidConfig(format!(
                "rho_growth must be at least 1, got {}",
                self.rho_growth
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(ControlError::InvalidConfig(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if self.max_iters == 0 || self.inner_iters == 0 {
            return Err(ControlError::InvalidConfig(
                "iteration limits must be positive".into(),
            ));
        }
        if self.starts.is_empty() || self.starts.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(ControlError::InvalidConfig(
                "starts must be a non-empty list of levels in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn single_start(mut self) -> Self {
        self.starts = vec![0.0];
        self
    }
}

/// Multipliers θ¹ for ẋ ≤ λ on every `(grid point, agent)` and the penalty ρ.
///
/// The box multipliers for 0 ≤ l ≤ 1 are not stored; they show up as the
/// sign of the gradient at active bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMultipliers {
    pub theta: Vec<f64>,
    pub rho: f64,
}

impl ConstraintMultipliers {
    pub fn zeros(grid_len: usize, n: usize, rho: f64) -> Self {
        Self {
            theta: vec![0.0; grid_len * n],
            rho,
        }
    }

    /// Plain Lagrangian (ρ = 0) with the given θ.
    pub fn lagrangian(theta: Vec<f64>) -> Self {
        Self { theta, rho: 0.0 }
    }

    /// ψ(g) with ψ' = max(0, θ + ρg); reduces to θ·g when ρ = 0.
    pub(crate) fn penalty(&self, q: usize, g: f64) -> (f64, f64) {
        let theta = self.theta[q];
        if self.rho > 0.0 {
            let m = (theta + self.rho * g).max(0.0);
            ((m * m - theta * theta) / (2.0 * self.rho), m)
        } else {
            (theta * g, theta)
        }
    }
}
