//! Pearson correlation with a Student-t significance test.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("zero variance in the {0} series")]
    ZeroVariance(&'static str),
}

/// Correlation coefficient and two-sided p-value for H0: ρ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let scale_a = a
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let scale_b = b
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    if saa <= (1e-14 * scale_a).powi(2) * n {
        return Err(StatsError::ZeroVariance("first"));
    }
    if sbb <= (1e-14 * scale_b).powi(2) * n {
        return Err(StatsError::ZeroVariance("second"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson r with the p-value of t = r·√((n−2)/(1−r²)) on n−2 degrees of
/// freedom.
pub fn pearson_test(a: &[f64], b: &[f64]) -> Result<Correlation, StatsError> {
    if a.len() < 3 {
        return Err(StatsError::TooFew {
            needed: 3,
            got: a.len(),
        });
    }
    let r = pearson(a, b)?;
    let n = a.len();
    Ok(Correlation {
        r,
        p_value: correlation_p_value(r, n),
        n,
    })
}

/// Two-sided p-value of a sample correlation `r` from `n` pairs.
pub fn correlation_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let one_minus = 1.0 - r * r;
    if one_minus <= 0.0 {
        return 0.0;
    }
    let t2 = r * r * df / one_minus;
    student_t_two_sided(t2.sqrt(), df)
}

/// P(|T| > t) for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    // P(|T| > t) = I_{df/(df+t²)}(df/2, 1/2); the (1 − u) form keeps
    // precision when t² ≪ df.
    let t2 = t * t;
    let u = df / (df + t2);
    let one_minus_u = t2 / (df + t2);
    regularized_incomplete_beta_pair(u, one_minus_u, 0.5 * df, 0.5)
}

/// ln Γ(x) for x > 0 (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta I_x(a, b).
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    regularized_incomplete_beta_pair(x, 1.0 - x, a, b)
}

fn regularized_incomplete_beta_pair(x: f64, one_minus_x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if one_minus_x <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * one_minus_x.ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(one_minus_x, b, a) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_correlation() {
        let a = [0.1, 0.4, 0.2, 0.9];
        let c = pearson_test(&a, &a).unwrap();
        assert!((c.r - 1.0).abs() < 1e-15);
        assert_eq!(c.p_value, 0.0);
    }

    #[test]
    fn constant_series_is_an_error() {
        assert_eq!(
            pearson_test(&[0.3; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]),
            Err(StatsError::ZeroVariance("first"))
        );
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x; I_x(a, 1) = x^a
        assert!((regularized_incomplete_beta(0.3, 1.0, 1.0) - 0.3).abs() < 1e-14);
        assert!((regularized_incomplete_beta(0.6, 3.0, 1.0) - 0.216).abs() < 1e-13);
    }

    #[test]
    fn t_with_one_df_is_cauchy() {
        // P(|T| > 1) = 1/2 for the Cauchy distribution
        assert!((student_t_two_sided(1.0, 1.0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn large_sample_correlation_is_highly_significant() {
        assert!(correlation_p_value(0.36, 1000) < 1e-30);
    }
}
