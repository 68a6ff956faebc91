use serde::{Deserialize, Serialize};

use super::EpidemicError;

/// Transmission, recovery and death rates, all per day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicParams {
    pub beta: f64,
    pub gamma: f64,
    pub kappa: f64,
}

impl EpidemicParams {
    /// β may be zero (no transmission); γ and κ must be positive.
    pub fn new(beta: f64, gamma: f64, kappa: f64) -> Result<Self, EpidemicError> {
        let p = Self { beta, gamma, kappa };
        p.validate()?;
        Ok(p)
    }

    /// β = 0.2, γ = 0.8/18, κ = 0.2/18: an 18-day infectious period with a
    /// 20% death share.
    pub fn baseline() -> Self {
        Self {
            beta: 0.2,
            gamma: 0.8 / 18.0,
            kappa: 0.2 / 18.0,
        }
    }

    pub fn validate(&self) -> Result<(), EpidemicError> {
        let bad = |name: &'static str, value: f64| EpidemicError::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {value}"),
        };
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(bad("beta", self.beta));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(bad("gamma", self.gamma));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(bad("kappa", self.kappa));
        }
        Ok(())
    }

    /// γ + κ.
    pub fn removal_rate(&self) -> f64 {
        self.gamma + self.kappa
    }

    /// β / (γ + κ), the single-link reproduction number.
    pub fn link_reproduction(&self) -> f64 {
        self.beta / self.removal_rate()
    }
}
