//! Power iteration for symmetric non-negative operators.

/// Dominant eigenpair estimate.
#[derive(Debug, Clone)]
pub(crate) struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
}

/// Power iteration on `M + shift·I` from the normalized all-ones vector.
///
/// For a symmetric non-negative `M` every eigenvalue lies in `[-ρ, ρ]`, so any
/// positive shift makes the Perron eigenvalue strictly dominant and keeps the
/// iterates non-negative. The eigenvalue is the Rayleigh quotient; iteration
/// stops once ‖Mv − ev‖∞ < tol·max(1, e).
pub(crate) fn power_iteration<F>(
    n: usize,
    matvec: F,
    shift: f64,
    tol: f64,
    max_iter: usize,
) -> Eigenpair
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = vec![0.0; n];
    let mut value = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        matvec(&v, &mut w);
        value = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        residual = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (b - value * a).abs())
            .fold(0.0, f64::max);
        if residual < tol * value.abs().max(1.0) {
            return Eigenpair {
                value,
                vector: v,
                residual,
                converged: true,
            };
        }
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += shift * vi;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    Eigenpair {
        value,
        vector: v,
        residual,
        converged: false,
    }
}
