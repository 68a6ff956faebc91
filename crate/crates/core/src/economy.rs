//! Per-agent production economy: labor supply, Cobb–Douglas output and
//! surplus, and their discounted aggregates along a trajectory.
//!
//! Labor follows h = (1 + φ·s·r·(1−x)(1−d))·(1 − ψ·l). With φ = 0 it does not
//! vanish as d → 1; the formula is applied as written in that regime.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epidemic::{AgentHealth, Trajectory};

/// Labor level below which the marginal product is evaluated at the floor,
/// keeping derivatives finite under full lockdown.
pub const LABOR_FLOOR: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EconomyError {
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{what}: expected {expected} agents, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("baseline surplus is zero; loss percentage undefined")]
    ZeroBaseline,
    #[error("economy csv line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentEconomy {
    pub p: f64,
    pub w: f64,
    pub k: f64,
    pub alpha: f64,
    pub phi: f64,
    pub psi: f64,
}

impl Default for AgentEconomy {
    /// α = 1/3, p = 1.2, w = p/3, k = 1, φ = 0, ψ = 1.
    fn default() -> Self {
        Self {
            p: 1.2,
            w: 0.4,
            k: 1.0,
            alpha: 1.0 / 3.0,
            phi: 0.0,
            psi: 1.0,
        }
    }
}

impl AgentEconomy {
    pub fn validate(&self) -> Result<(), EconomyError> {
        let check = |name: &'static str, ok: bool, v: f64| {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(EconomyError::InvalidParameter {
                    name,
                    reason: format!("value {v} out of range"),
                })
            }
        };
        check("p", self.p > 0.0, self.p)?;
        check("w", self.w >= 0.0, self.w)?;
        check("k", self.k >= 0.0, self.k)?;
        check("alpha", (0.0..=1.0).contains(&self.alpha), self.alpha)?;
        check("phi", (0.0..=1.0).contains(&self.phi), self.phi)?;
        check("psi", (0.0..=1.0).contains(&self.psi), self.psi)
    }
}

/// Planner's per-day discount rate δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscountRate(pub f64);

impl DiscountRate {
    pub fn new(delta: f64) -> Result<Self, EconomyError> {
        if delta.is_finite() && delta > 0.0 {
            Ok(Self(delta))
        } else {
            Err(EconomyError::InvalidParameter {
                name: "delta",
                reason: format!("must be positive, got {delta}"),
            })
        }
    }

    pub fn factor(&self, t: f64) -> f64 {
        (-self.0 * t).exp()
    }
}

impl Default for DiscountRate {
    /// 5% a year.
    fn default() -> Self {
        Self(0.05 / 365.0)
    }
}

fn health_factor(econ: &AgentEconomy, st: AgentHealth) -> f64 {
    1.0 + econ.phi * st.s * st.r * (1.0 - st.x) * (1.0 - st.d)
}

pub fn labor_supply(st: AgentHealth, l: f64, econ: &AgentEconomy) -> f64 {
    health_factor(econ, st) * (1.0 - econ.psi * l)
}

/// y = k^α h^(1−α); `k` when α = 1.
pub fn output(econ: &AgentEconomy, h: f64) -> f64 {
    if econ.alpha >= 1.0 {
        return econ.k;
    }
    if h <= 0.0 {
        return 0.0;
    }
    econ.k.powf(econ.alpha) * h.powf(1.0 - econ.alpha)
}

/// W = p·y − w·h.
pub fn surplus(econ: &AgentEconomy, st: AgentHealth, l: f64) -> f64 {
    let h = labor_supply(st, l, econ);
    econ.p * output(econ, h) - econ.w * h
}

/// Partial derivatives of one agent's surplus.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurplusPartials {
    pub ds: f64,
    pub dx: f64,
    pub dr: f64,
    pub dd: f64,
    pub dl: f64,
    /// ∂²W/∂l², used for step scaling.
    pub dll: f64,
}

pub fn surplus_partials(econ: &AgentEconomy, st: AgentHealth, l: f64) -> SurplusPartials {
    surplus_and_partials(econ, st, l).1
}

/// W together with its partials, sharing the power evaluations.
pub fn surplus_and_partials(
    econ: &AgentEconomy,
    st: AgentHealth,
    l: f64,
) -> (f64, SurplusPartials) {
    let a = health_factor(econ, st);
    let b = 1.0 - econ.psi * l;
    let h = a * b;
    let (value, dw_dh, d2w_dh2) = if econ.alpha >= 1.0 {
        (econ.p * econ.k - econ.w * h, -econ.w, 0.0)
    } else {
        let hf = h.max(LABOR_FLOOR);
        // y/h = k^α h^(−α)
        let per_hour = (econ.k / hf).powf(econ.alpha);
        let y = if h > 0.0 { per_hour * h } else { 0.0 };
        let marginal = econ.p * (1.0 - econ.alpha) * per_hour;
        (
            econ.p * y - econ.w * h,
            marginal - econ.w,
            -econ.alpha * marginal / hf,
        )
    };
    let phi = econ.phi;
    let partials = SurplusPartials {
        ds: dw_dh * phi * st.r * (1.0 - st.x) * (1.0 - st.d) * b,
        dr: dw_dh * phi * st.s * (1.0 - st.x) * (1.0 - st.d) * b,
        dx: -dw_dh * phi * st.s * st.r * (1.0 - st.d) * b,
        dd: -dw_dh * phi * st.s * st.r * (1.0 - st.x) * b,
        dl: -dw_dh * econ.psi * a,
        dll: d2w_dh2 * (econ.psi * a).powi(2),
    };
    (value, partials)
}

/// Per-agent economies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Economy {
    agents: Vec<AgentEconomy>,
}

impl Economy {
    pub fn homogeneous(n: usize, econ: AgentEconomy) -> Result<Self, EconomyError> {
        econ.validate()?;
        Ok(Self {
            agents: vec![econ; n],
        })
    }

    pub fn from_agents(agents: Vec<AgentEconomy>) -> Result<Self, EconomyError> {
        for a in &agents {
            a.validate()?;
        }
        Ok(Self { agents })
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agent(&self, i: usize) -> &AgentEconomy {
        &self.agents[i]
    }

    pub fn agents(&self) -> &[AgentEconomy] {
        &self.agents
    }

    /// Applies `agent,p,w,k,alpha,phi,psi` override rows.
    pub fn apply_overrides_csv(&mut self, text: &str) -> Result<(), EconomyError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "agent,p,w,k,alpha,phi,psi" => {}
            _ => {
                return Err(EconomyError::Parse {
                    line: 1,
                    reason: "expected header `agent,p,w,k,alpha,phi,psi`".into(),
                })
            }
        }
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |reason: String| EconomyError::Parse {
                line: idx + 1,
                reason,
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(err(format!("expected 7 fields, got {}", fields.len())));
            }
            let agent: usize = fields[0]
                .parse()
                .map_err(|_| err(format!("bad agent `{}`", fields[0])))?;
            if agent >= self.agents.len() {
                return Err(err(format!("agent {agent} out of range")));
            }
            let mut v = [0.0; 6];
            for (slot, f) in v.iter_mut().zip(&fields[1..]) {
                *slot = f.parse().map_err(|_| err(format!("bad number `{f}`")))?;
            }
            let econ = AgentEconomy {
                p: v[0],
                w: v[1],
                k: v[2],
                alpha: v[3],
                phi: v[4],
                psi: v[5],
            };
            econ.validate().map_err(|e| err(e.to_string()))?;
            self.agents[agent] = econ;
        }
        Ok(())
    }

    pub fn apply_overrides_file(&mut self, path: &Path) -> Result<(), EconomyError> {
        let text = std::fs::read_to_string(path).map_err(|source| EconomyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_overrides_csv(&text)
    }

    fn check_dims(&self, traj: &Trajectory) -> Result<(), EconomyError> {
        if traj.n() != self.n() {
            return Err(EconomyError::Dimension {
                what: "trajectory",
                expected: self.n(),
                got: traj.n(),
            });
        }
        Ok(())
    }

    /// Σ_i W_i at grid point `k`.
    pub fn total_surplus_at(&self, traj: &Trajectory, k: usize) -> f64 {
        let (s, x, r, d) = (traj.s_at(k), traj.x_at(k), traj.r_at(k), traj.d_at(k));
        let l = traj.policy().at(k);
        (0..self.n())
            .map(|i| {
                let st = AgentHealth {
                    s: s[i],
                    x: x[i],
                    r: r[i],
                    d: d[i],
                };
                surplus(&self.agents[i], st, l[i])
            })
            .sum()
    }

    /// Σ_i W_i with everyone healthy and free.
    pub fn baseline_total_surplus(&self) -> f64 {
        let healthy = AgentHealth {
            s: 1.0,
            x: 0.0,
            r: 0.0,
            d: 0.0,
        };
        self.agents.iter().map(|a| surplus(a, healthy, 0.0)).sum()
    }
}

/// Trapezoidal ∫ e^(−δt) Σ_i W_i(t) dt over the trajectory grid.
pub fn discounted_aggregate_surplus(
    traj: &Trajectory,
    econ: &Economy,
    rate: DiscountRate,
) -> Result<f64, EconomyError> {
    econ.check_dims(traj)?;
    let grid = traj.grid();
    Ok((0..traj.len())
        .map(|k| {
            grid.trapezoid_weight(k) * rate.factor(grid.time(k)) * econ.total_surplus_at(traj, k)
        })
        .sum())
}

/// Discounted surplus of the no-pandemic economy on the same grid.
pub fn baseline_discounted_surplus(traj: &Trajectory, econ: &Economy, rate: DiscountRate) -> f64 {
    let grid = traj.grid();
    let w0 = econ.baseline_total_surplus();
    (0..traj.len())
        .map(|k| grid.trapezoid_weight(k) * rate.factor(grid.time(k)) * w0)
        .sum()
}

/// 100·(1 − V_pandemic / V_baseline).
pub fn surplus_loss_pct(
    traj: &Trajectory,
    econ: &Economy,
    rate: DiscountRate,
) -> Result<f64, EconomyError> {
    let value = discounted_aggregate_surplus(traj, econ, rate)?;
    let base = baseline_discounted_surplus(traj, econ, rate);
    if base == 0.0 {
        return Err(EconomyError::ZeroBaseline);
    }
    Ok(100.0 * (1.0 - value / base))
}

/// Loss percentage of the discounted surplus accumulated over `[0, t_k]`,
/// for each grid point; the first entry is the instantaneous loss at t = 0.
pub fn cumulative_loss_pct_series(
    traj: &Trajectory,
    econ: &Economy,
    rate: DiscountRate,
) -> Result<Vec<f64>, EconomyError> {
    econ.check_dims(traj)?;
    let w0 = econ.baseline_total_surplus();
    if w0 == 0.0 {
        return Err(EconomyError::ZeroBaseline);
    }
    let grid = traj.grid();
    let flows: Vec<f64> = (0..traj.len())
        .map(|k| rate.factor(grid.time(k)) * econ.total_surplus_at(traj, k))
        .collect();
    let mut out = Vec::with_capacity(flows.len());
    out.push(100.0 * (1.0 - flows[0] / w0));
    let (mut value, mut base) = (0.0, 0.0);
    for k in 1..flows.len() {
        let half = 0.5 * grid.dt;
        value += half * (flows[k - 1] + flows[k]);
        base += half * w0 * (rate.factor(grid.time(k - 1)) + rate.factor(grid.time(k)));
        out.push(100.0 * (1.0 - value / base));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combined_evaluation_matches_surplus() {
        let e = AgentEconomy {
            phi: 0.5,
            ..AgentEconomy::default()
        };
        let st = AgentHealth {
            s: 0.6,
            x: 0.1,
            r: 0.2,
            d: 0.1,
        };
        for l in [0.0, 0.3, 0.999, 1.0] {
            let (w, p) = surplus_and_partials(&e, st, l);
            assert!((w - surplus(&e, st, l)).abs() < 1e-14, "l = {l}");
            assert_eq!(p, surplus_partials(&e, st, l));
        }
    }

    const HEALTHY: AgentHealth = AgentHealth {
        s: 1.0,
        x: 0.0,
        r: 0.0,
        d: 0.0,
    };

    #[test]
    fn labor_cases() {
        let e = AgentEconomy::default();
        assert!((labor_supply(HEALTHY, 0.3, &e) - 0.7).abs() < 1e-15);
        assert_eq!(labor_supply(HEALTHY, 1.0, &e), 0.0);
        let e1 = AgentEconomy { phi: 1.0, ..e };
        let st = AgentHealth {
            s: 0.5,
            x: 0.0,
            r: 0.5,
            d: 0.0,
        };
        assert!((labor_supply(st, 0.0, &e1) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn output_cases() {
        let e = AgentEconomy::default();
        assert!((output(&e, 1.0) - 1.0).abs() < 1e-15);
        assert!((output(&e, 0.7) - 0.7f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert!((output(&e, 0.7) - 0.788374).abs() < 1e-6);
        assert_eq!(output(&e, 0.0), 0.0);
        let capital_only = AgentEconomy {
            alpha: 1.0,
            k: 2.0,
            ..e
        };
        assert_eq!(output(&capital_only, 0.0), 2.0);
    }

    #[test]
    fn surplus_cases() {
        let e = AgentEconomy::default();
        assert!((surplus(&e, HEALTHY, 0.0) - 0.8).abs() < 1e-12);
        assert_eq!(surplus(&e, HEALTHY, 1.0), 0.0);
        let half = 1.2 * 0.5f64.powf(2.0 / 3.0) - 0.4 * 0.5;
        assert!((surplus(&e, HEALTHY, 0.5) - half).abs() < 1e-12);
        assert!((half - 0.555953).abs() < 1e-6);
    }

    #[test]
    fn partials_match_finite_differences() {
        let e = AgentEconomy {
            phi: 0.7,
            psi: 0.8,
            ..AgentEconomy::default()
        };
        let st = AgentHealth {
            s: 0.4,
            x: 0.1,
            r: 0.3,
            d: 0.2,
        };
        let l = 0.35;
        let g = surplus_partials(&e, st, l);
        let h = 1e-6;
        let fd = |f: &dyn Fn(f64) -> f64| (f(h) - f(-h)) / (2.0 * h);
        let ds = fd(&|eps| {
            surplus(
                &e,
                AgentHealth {
                    s: st.s + eps,
                    ..st
                },
                l,
            )
        });
        let dx = fd(&|eps| {
            surplus(
                &e,
                AgentHealth {
                    x: st.x + eps,
                    ..st
                },
                l,
            )
        });
        let dr = fd(&|eps| {
            surplus(
                &e,
                AgentHealth {
                    r: st.r + eps,
                    ..st
                },
                l,
            )
        });
        let dd = fd(&|eps| {
            surplus(
                &e,
                AgentHealth {
                    d: st.d + eps,
                    ..st
                },
                l,
            )
        });
        let dl = fd(&|eps| surplus(&e, st, l + eps));
        for (a, b) in [(g.ds, ds), (g.dx, dx), (g.dr, dr), (g.dd, dd), (g.dl, dl)] {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        let dll = fd(&|eps| surplus_partials(&e, st, l + eps).dl);
        assert!((g.dll - dll).abs() < 1e-6);
    }

    #[test]
    fn surplus_falls_with_lockdown_in_base_configuration() {
        let e = AgentEconomy::default();
        for k in 0..100 {
            let l = k as f64 / 100.0;
            assert!(surplus_partials(&e, HEALTHY, l).dl < 0.0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(AgentEconomy {
            alpha: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(AgentEconomy {
            p: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(DiscountRate::new(0.0).is_err());
    }

    #[test]
    fn override_csv() {
        let mut econ = Economy::homogeneous(3, AgentEconomy::default()).unwrap();
        econ.apply_overrides_csv("agent,p,w,k,alpha,phi,psi\n1,2,0.5,3,0.25,0,1\n")
            .unwrap();
        assert_eq!(econ.agent(1).k, 3.0);
        assert_eq!(econ.agent(0), &AgentEconomy::default());
        let err = econ
            .apply_overrides_csv("agent,p,w,k,alpha,phi,psi\n0,1,1,1,2,0,1\n")
            .unwrap_err();
        assert!(matches!(err, EconomyError::Parse { line: 2, .. }));
    }
}
