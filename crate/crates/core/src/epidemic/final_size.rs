use super::{EpidemicError, NextGenMatrix, Trajectory};

const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_MAX_ITER: usize = 1_000_000;
const EXTINCTION_LEVEL: f64 = 1e-4;

/// Solution of z = 1 − exp(−Mz).
#[derive(Debug, Clone, PartialEq)]
pub struct FinalSize {
    /// Per-agent attack rate.
    pub z: Vec<f64>,
    /// ‖z − (1 − exp(−Mz))‖∞.
    pub residual: f64,
    pub iterations: usize,
    /// R0 ≤ 1: the iteration collapses to the trivial solution z = 0.
    pub below_threshold: bool,
}

/// Fixed-point iteration z ← 1 − exp(−Mz) from z₀ = (1 − 1e−6)·1.
pub fn final_size(m: &NextGenMatrix) -> Result<FinalSize, EpidemicError> {
    let n = m.n();
    let mut z = vec![1.0 - 1e-6; n];
    let mut mz = vec![0.0; n];
    for it in 1..=FIXED_POINT_MAX_ITER {
        m.mul_vec(&z, &mut mz);
        let mut change: f64 = 0.0;
        for (zi, mzi) in z.iter_mut().zip(&mz) {
            let next = -(-mzi).exp_m1();
            change = change.max((next - *zi).abs());
            *zi = next;
        }
        if change < FIXED_POINT_TOL {
            m.mul_vec(&z, &mut mz);
            let residual = z
                .iter()
                .zip(&mz)
                .map(|(zi, mzi)| (zi + (-mzi).exp_m1()).abs())
                .fold(0.0, f64::max);
            return Ok(FinalSize {
                z,
                residual,
                iterations: it,
                below_threshold: m.r0() <= 1.0,
            });
        }
    }
    Err(EpidemicError::NotConverged {
        what: "final size fixed point",
        iterations: FIXED_POINT_MAX_ITER,
    })
}

/// Terminal attack rates measured two ways from a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackRates {
    /// r_i(T) + d_i(T).
    pub removed: Vec<f64>,
    /// 1 − s_i(T)/s_i(0).
    pub depletion: Vec<f64>,
    /// Bound on |removed − depletion| implied by the initial and residual
    /// infection: (max x(0) + max x(T)) / min s(0) + 1e−6.
    pub tolerance: f64,
}

impl AttackRates {
    pub fn max_discrepancy(&self) -> f64 {
        self.removed
            .iter()
            .zip(&self.depletion)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Requires the epidemic to be extinguished at the horizon (max x < 1e−4).
pub fn attack_rate_check(traj: &Trajectory) -> Result<AttackRates, EpidemicError> {
    let last = traj.grid().steps;
    let xt = traj.x_at(last);
    let max_xt = xt.iter().copied().fold(0.0, f64::max);
    if max_xt >= EXTINCTION_LEVEL {
        return Err(EpidemicError::NotExtinguished {
            horizon: traj.grid().horizon(),
            max_infection: max_xt,
        });
    }
    let s0 = traj.s_at(0);
    let removed: Vec<f64> = traj
        .r_at(last)
        .iter()
        .zip(traj.d_at(last))
        .map(|(r, d)| r + d)
        .collect();
    let depletion = traj
        .s_at(last)
        .iter()
        .zip(s0)
        .map(|(st, s0)| if *s0 > 0.0 { 1.0 - st / s0 } else { 0.0 })
        .collect();
    let max_x0 = traj.x_at(0).iter().copied().fold(0.0, f64::max);
    let min_s0 = s0.iter().copied().filter(|s| *s > 0.0).fold(1.0, f64::min);
    Ok(AttackRates {
        removed,
        depletion,
        tolerance: (max_x0 + max_xt) / min_s0 + 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_matrix_has_no_epidemic() {
        let fs = final_size(&NextGenMatrix::from_dense(3, &[0.0; 9]).unwrap()).unwrap();
        assert_eq!(fs.z, vec![0.0; 3]);
        assert!(fs.below_threshold);
    }

    #[test]
    fn scalar_case_matches_bisection() {
        let oracle = bisect(|z| z - 1.0 + (-2.0 * z).exp(), 0.5, 1.0);
        let fs = final_size(&NextGenMatrix::from_dense(1, &[2.0]).unwrap()).unwrap();
        assert!((fs.z[0] - oracle).abs() < 1e-10);
        assert!((fs.z[0] - 0.796812).abs() < 1e-5);
        assert!(fs.residual < 1e-12);
        assert!(!fs.below_threshold);
    }

    #[test]
    fn symmetric_pair_reduces_to_scalar() {
        let oracle = bisect(|z| z - 1.0 + (-3.6 * z).exp(), 0.5, 1.0);
        let fs = final_size(&NextGenMatrix::from_dense(2, &[0.0, 3.6, 3.6, 0.0]).unwrap()).unwrap();
        for z in &fs.z {
            assert!((z - oracle).abs() < 1e-10);
            assert!((z - 0.969506).abs() < 1e-5);
        }
    }

    #[test]
    fn subcritical_collapses_to_zero() {
        let fs = final_size(&NextGenMatrix::from_dense(1, &[0.5]).unwrap()).unwrap();
        assert!(fs.below_threshold);
        assert!(fs.z[0] < 1e-10);
    }
}
