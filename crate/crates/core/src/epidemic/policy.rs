use serde::{Deserialize, Serialize};

use super::EpidemicError;

/// Uniform time grid `t_k = k·dt`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// Grid covering `[0, horizon]`; `horizon` must be a multiple of `dt`.
    pub fn new(horizon: f64, dt: f64) -> Result<Self, EpidemicError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(EpidemicError::InvalidParameter {
                name: "dt",
                reason: format!("must be positive, got {dt}"),
            });
        }
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(EpidemicError::InvalidParameter {
                name: "horizon",
                reason: format!("must be non-negative, got {horizon}"),
            });
        }
        let ratio = horizon / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(EpidemicError::InvalidParameter {
                name: "horizon",
                reason: format!("{horizon} is not a multiple of dt = {dt}"),
            });
        }
        Ok(Self {
            dt,
            steps: steps as usize,
        })
    }

    /// Number of grid points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Grid index of time `t`, if `t` falls on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = (t / self.dt).round();
        if k < 0.0 || (k * self.dt - t).abs() > 1e-9 * t.abs().max(1.0) {
            return None;
        }
        let k = k as usize;
        (k <= self.steps).then_some(k)
    }

    /// Trapezoid weight of grid point `k`.
    pub fn trapezoid_weight(&self, k: usize) -> f64 {
        if self.steps == 0 {
            0.0
        } else if k == 0 || k == self.steps {
            0.5 * self.dt
        } else {
            self.dt
        }
    }
}

/// Piecewise-constant lockdown: row `k` is applied on `[t_k, t_{k+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockdownPolicy {
    n: usize,
    grid_len: usize,
    values: Vec<f64>,
}

impl LockdownPolicy {
    pub fn constant(grid_len: usize, n: usize, level: f64) -> Result<Self, EpidemicError> {
        Self::from_values(grid_len, n, vec![level; grid_len * n])
    }

    pub fn zeros(grid_len: usize, n: usize) -> Self {
        Self {
            n,
            grid_len,
            values: vec![0.0; grid_len * n],
        }
    }

    /// Row-major `(grid point, agent)` values, each in `[0, 1]`.
    pub fn from_values(grid_len: usize, n: usize, values: Vec<f64>) -> Result<Self, EpidemicError> {
        if values.len() != grid_len * n {
            return Err(EpidemicError::Dimension {
                what: "policy",
                expected: grid_len * n,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(EpidemicError::InvalidControl {
                agent: pos % n.max(1),
                value: values[pos],
            });
        }
        Ok(Self {
            n,
            grid_len,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    pub fn at(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    pub fn get(&self, k: usize, agent: usize) -> f64 {
        self.values[k * self.n + agent]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Mean of `l_i(t_k)` over grid points, per agent.
    pub fn time_average(&self) -> Vec<f64> {
        let mut avg = vec![0.0; self.n];
        for k in 0..self.grid_len {
            for (a, v) in avg.iter_mut().zip(self.at(k)) {
                *a += v;
            }
        }
        for a in &mut avg {
            *a /= self.grid_len as f64;
        }
        avg
    }

    /// Mean over all agents and grid points.
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }
}
