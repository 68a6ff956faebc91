use serde::{Deserialize, Serialize};

use crate::netgen::spectral::power_iteration;
use crate::netgen::Network;

use super::dynamics::check_control;
use super::{EpidemicError, EpidemicParams};

pub const SPECTRAL_TOL: f64 = 1e-10;
const SPECTRAL_MAX_ITER: usize = 200_000;
pub const STABILITY_EPS: f64 = 1e-9;

/// Sparse symmetric non-negative next-generation matrix and its spectral
/// radius.
#[derive(Debug, Clone, PartialEq)]
pub struct NextGenMatrix {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    r0: f64,
}

impl NextGenMatrix {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for row in rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        let mut m = Self {
            n,
            offsets,
            cols,
            vals,
            r0: 0.0,
        };
        m.r0 = m.spectral_radius();
        m
    }

    /// Builds from a row-major dense matrix, which must be symmetric and
    /// non-negative. A diagonal is accepted so scalar test cases can be
    /// expressed as 1×1 matrices.
    pub fn from_dense(n: usize, dense: &[f64]) -> Result<Self, EpidemicError> {
        if dense.len() != n * n {
            return Err(EpidemicError::Dimension {
                what: "matrix",
                expected: n * n,
                got: dense.len(),
            });
        }
        let mut rows = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                let v = dense[i * n + j];
                if !(v.is_finite() && v >= 0.0) || v != dense[j * n + i] {
                    return Err(EpidemicError::InvalidParameter {
                        name: "matrix",
                        reason: format!("entry ({i}, {j}) = {v} breaks symmetry or non-negativity"),
                    });
                }
                if v > 0.0 {
                    rows[i].push((j, v));
                }
            }
        }
        Ok(Self::from_rows(rows))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Spectral radius R0.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.cols[self.offsets[i]..self.offsets[i + 1]];
        match cols.binary_search(&j) {
            Ok(p) => self.vals[self.offsets[i] + p],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for k in self.offsets[i]..self.offsets[i + 1] {
                out[i * self.n + self.cols[k]] = self.vals[k];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.offsets[i]..self.offsets[i + 1] {
                acc += self.vals[k] * v[self.cols[k]];
            }
            *o = acc;
        }
    }

    fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.vals[self.offsets[i]..self.offsets[i + 1]]
                    .iter()
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn spectral_radius(&self) -> f64 {
        if self.vals.is_empty() {
            return 0.0;
        }
        let shift = 0.5 * self.max_row_sum();
        let pair = power_iteration(
            self.n,
            |v, o| self.mul_vec(v, o),
            shift,
            SPECTRAL_TOL,
            SPECTRAL_MAX_ITER,
        );
        if !pair.converged {
            log::warn!(
                "spectral radius power iteration stopped at residual {:.3e}",
                pair.residual
            );
        }
        pair.value.max(0.0)
    }
}

/// M_ij = β/(γ+κ) · A_ij · (1−l_i)(1−l_j), with R0 = ρ(M).
pub fn next_generation_matrix(
    net: &Network,
    params: &EpidemicParams,
    l: &[f64],
) -> Result<NextGenMatrix, EpidemicError> {
    params.validate()?;
    check_control(l, net.n())?;
    let scale = params.link_reproduction();
    let rows = (0..net.n())
        .map(|i| {
            net.neighbors(i)
                .map(|(j, a)| (j, scale * a * (1.0 - l[i]) * (1.0 - l[j])))
                .filter(|&(_, v)| v > 0.0)
                .collect()
        })
        .collect();
    Ok(NextGenMatrix::from_rows(rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DfeStability {
    Stable,
    Unstable,
    Critical,
}

/// Local stability of the disease-free equilibrium from R0, with a ±1e−9
/// critical band around one.
pub fn classify_dfe_stability(r0: f64) -> Result<DfeStability, EpidemicError> {
    if !(r0.is_finite() && r0 >= 0.0) {
        return Err(EpidemicError::InvalidParameter {
            name: "r0",
            reason: format!("must be non-negative, got {r0}"),
        });
    }
    Ok(if r0 < 1.0 - STABILITY_EPS {
        DfeStability::Stable
    } else if r0 > 1.0 + STABILITY_EPS {
        DfeStability::Unstable
    } else {
        DfeStability::Critical
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> Network {
        Network::from_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    fn pair_params() -> EpidemicParams {
        EpidemicParams::new(0.2, 1.0 / 36.0, 1.0 / 36.0).unwrap()
    }

    #[test]
    fn full_lockdown_has_zero_r0() {
        let m = next_generation_matrix(&pair(), &pair_params(), &[1.0, 1.0]).unwrap();
        assert_eq!(m.to_dense(), vec![0.0; 4]);
        assert_eq!(m.r0(), 0.0);
    }

    #[test]
    fn two_agent_r0() {
        let m = next_generation_matrix(&pair(), &pair_params(), &[0.0, 0.0]).unwrap();
        assert!((m.get(0, 1) - 3.6).abs() < 1e-12);
        assert!((m.r0() - 3.6).abs() < 1e-9);
    }

    #[test]
    fn stability_classes() {
        assert_eq!(classify_dfe_stability(0.5).unwrap(), DfeStability::Stable);
        assert_eq!(classify_dfe_stability(3.6).unwrap(), DfeStability::Unstable);
        assert_eq!(classify_dfe_stability(1.0).unwrap(), DfeStability::Critical);
        assert!(classify_dfe_stability(-0.1).is_err());
    }

    #[test]
    fn dense_input_validation() {
        assert!(NextGenMatrix::from_dense(2, &[0.0, 1.0, 2.0, 0.0]).is_err());
        let scalar = NextGenMatrix::from_dense(1, &[2.0]).unwrap();
        assert!((scalar.r0() - 2.0).abs() < 1e-12);
    }
}
