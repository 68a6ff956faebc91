//! Networked SIRD dynamics under lockdown: the ODE right-hand side, RK4
//! integration, the next-generation matrix and final epidemic size.

mod dynamics;
mod final_size;
mod integrate;
pub mod io;
mod ngm;
mod params;
mod policy;
mod state;

use thiserror::Error;

pub use dynamics::{derivative, HealthDerivative};
pub(crate) use dynamics::{Compartments, Kernel};
pub use final_size::{attack_rate_check, final_size, AttackRates, FinalSize};
pub use integrate::{integrate, Trajectory};
pub(crate) use integrate::{integrate_feedback, integrate_unchecked, Rk4Workspace};
pub use ngm::{classify_dfe_stability, next_generation_matrix, DfeStability, NextGenMatrix};
pub use params::EpidemicParams;
pub use policy::{LockdownPolicy, TimeGrid};
pub use state::{AgentHealth, HealthState, STATE_TOL};

#[derive(Debug, Error)]
pub enum EpidemicError {
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{what}: expected length {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("agent {agent}: lockdown {value} outside [0, 1]")]
    InvalidControl { agent: usize, value: f64 },
    #[error("agent {agent}: {reason}")]
    InvalidState { agent: usize, reason: String },
    #[error(
        "integration unstable at t = {time}: agent {agent} {compartment} = {value}; use a smaller dt"
    )]
    Unstable {
        time: f64,
        agent: usize,
        compartment: &'static str,
        value: f64,
    },
    #[error("{what} did not converge within {iterations} iterations")]
    NotConverged {
        what: &'static str,
        iterations: usize,
    },
    #[error("epidemic not extinguished at t = {horizon} (max infection {max_infection:.3e})")]
    NotExtinguished { horizon: f64, max_infection: f64 },
    #[error("csv line {line}: {reason}")]
    Parse { line: usize, reason: String },
}
