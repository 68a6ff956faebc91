//! The planner's problem: choose l_i(t) ∈ [0, 1] on the RK4 grid to maximize
//! discounted aggregate surplus while every agent's infection rate stays
//! below the cap λ.

mod active;
mod precond;
mod problem;
mod report;
mod solver;
mod sweep;

use thiserror::Error;

use crate::economy::EconomyError;
use crate::epidemic::EpidemicError;
use crate::stats::StatsError;

pub use crate::epidemic::LockdownPolicy;
pub use problem::{ConstraintMultipliers, PlannerProblem, SolverConfig, SolverMethod};
pub use report::{
    lockdown_centrality_correlation, parse_policy_csv, policy_csv, SolutionSummary, POLICY_HEADER,
};
pub use solver::{solve_optimal_lockdown, verify_kkt, KktReport, Solution};
pub use sweep::{
    adjoint_integrate, augmented_objective, control_gradient, incidence, AdjointState,
};

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("invalid solver input: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Epidemic(#[from] EpidemicError),
    #[error(transparent)]
    Economy(#[from] EconomyError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("costates became non-finite at t = {time}")]
    AdjointBlowUp { time: f64 },
}

impl ControlError {
    /// Whether the failure is numerical (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            ControlError::AdjointBlowUp { .. }
                | ControlError::Epidemic(EpidemicError::Unstable { .. })
                | ControlError::Epidemic(EpidemicError::NotConverged { .. })
        )
    }
}
