use serde::{Deserialize, Serialize};

use super::EpidemicError;

/// Tolerance on probabilities and on the per-agent compartment sum.
pub const STATE_TOL: f64 = 1e-9;

/// Per-agent probabilities of being susceptible, infected, recovered, dead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthState {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub d: Vec<f64>,
}

impl HealthState {
    pub fn disease_free(n: usize) -> Self {
        Self {
            s: vec![1.0; n],
            x: vec![0.0; n],
            r: vec![0.0; n],
            d: vec![0.0; n],
        }
    }

    /// Every agent infected with probability `x0`, susceptible otherwise.
    pub fn uniform(n: usize, x0: f64) -> Result<Self, EpidemicError> {
        check_probability("x0", x0)?;
        Ok(Self {
            s: vec![1.0 - x0; n],
            x: vec![x0; n],
            r: vec![0.0; n],
            d: vec![0.0; n],
        })
    }

    /// The listed agents infected with probability `x0`, the rest fully
    /// susceptible.
    pub fn seeded(n: usize, agents: &[usize], x0: f64) -> Result<Self, EpidemicError> {
        check_probability("x0", x0)?;
        let mut st = Self::disease_free(n);
        for &a in agents {
            if a >= n {
                return Err(EpidemicError::InvalidParameter {
                    name: "seed agent",
                    reason: format!("index {a} out of range for n = {n}"),
                });
            }
            st.s[a] = 1.0 - x0;
            st.x[a] = x0;
        }
        Ok(st)
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    /// Checks lengths, the `[0, 1]` box and the unit compartment sum.
    pub fn validate(&self) -> Result<(), EpidemicError> {
        let n = self.s.len();
        for (name, v) in [("x", &self.x), ("r", &self.r), ("d", &self.d)] {
            if v.len() != n {
                return Err(EpidemicError::Dimension {
                    what: name,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        for i in 0..n {
            for (name, v) in [
                ("s", self.s[i]),
                ("x", self.x[i]),
                ("r", self.r[i]),
                ("d", self.d[i]),
            ] {
                if !((-STATE_TOL..=1.0 + STATE_TOL).contains(&v)) {
                    return Err(EpidemicError::InvalidState {
                        agent: i,
                        reason: format!("{name} = {v} outside [0, 1]"),
                    });
                }
            }
            let total = self.s[i] + self.x[i] + self.r[i] + self.d[i];
            if (total - 1.0).abs() > STATE_TOL {
                return Err(EpidemicError::InvalidState {
                    agent: i,
                    reason: format!("compartments sum to {total}"),
                });
            }
        }
        Ok(())
    }

    pub fn agent(&self, i: usize) -> AgentHealth {
        AgentHealth {
            s: self.s[i],
            x: self.x[i],
            r: self.r[i],
            d: self.d[i],
        }
    }
}

/// One agent's `(s, x, r, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentHealth {
    pub s: f64,
    pub x: f64,
    pub r: f64,
    pub d: f64,
}

fn check_probability(name: &'static str, v: f64) -> Result<(), EpidemicError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(EpidemicError::InvalidParameter {
            name,
            reason: format!("must lie in [0, 1], got {v}"),
        })
    }
}
