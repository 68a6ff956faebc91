//! Optimal lockdown of SIRD epidemics on weighted contact networks.
//!
//! The crate is organized by stage of the analysis:
//!
//! - [`netgen`]: contact networks, random generators, centrality measures
//! - [`epidemic`]: networked SIRD dynamics, RK4 integration, next-generation
//!   matrix, final size
//! - [`economy`]: labor, output and discounted surplus
//! - [`control`]: the planner's incidence-capped surplus maximization solved by
//!   a forward–backward sweep with an augmented Lagrangian
//! - [`calibrate`]: simulated minimum-distance estimation of the incidence cap
//! - [`cli`]: scenario configuration and the commands behind the `netlock`
//!   binary
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod calibrate;
pub mod cli;
pub mod control;
pub mod economy;
pub mod epidemic;
pub mod netgen;
pub mod stats;
