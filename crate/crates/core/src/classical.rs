//! Classical tail index estimators: Hill (both tails), Pickands and the
//! Dekkers-Einmahl-de Haan moment estimator.
//!
//! Every estimate also carries the Parzen exponent `nu = 1 + alpha`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantile::SampleData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ClassicalKind {
    HillRight,
    HillLeft,
    Pickands,
    DEdH,
}

impl fmt::Display for ClassicalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassicalKind::HillRight => "hill_right",
            ClassicalKind::HillLeft => "hill_left",
            ClassicalKind::Pickands => "pickands",
            ClassicalKind::DEdH => "dedh",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalEstimate {
    /// Tail index (Hill) or extreme-value index (Pickands, DEdH).
    pub alpha_hat: f64,
    pub nu_hat: f64,
    pub estimator: ClassicalKind,
    pub k_n: usize,
}

impl ClassicalEstimate {
    fn new(alpha_hat: f64, estimator: ClassicalKind, k_n: usize) -> Self {
        Self {
            alpha_hat,
            nu_hat: 1.0 + alpha_hat,
            estimator,
            k_n,
        }
    }
}

fn check_fraction(sample: &SampleData, k_n: usize) -> Result<()> {
    if k_n == 0 || k_n >= sample.n() {
        return Err(Error::Domain(format!(
            "sample fraction must satisfy 1 <= k_n < n, got k_n = {k_n}, n = {}",
            sample.n()
        )));
    }
    Ok(())
}

/// Mean and mean square of `log(X_{n-j+1,n} / X_{n-k,n})`, `j = 1..=k`.
fn upper_log_moments(sample: &SampleData, k_n: usize) -> Result<(f64, f64)> {
    check_fraction(sample, k_n)?;
    let n = sample.n();
    let pivot = sample.order_stat(n - k_n);
    if pivot <= 0.0 {
        return Err(Error::Domain(format!(
            "pivot order statistic X_(n-k_n) = {pivot} must be positive"
        )));
    }
    let log_pivot = pivot.ln();
    let (mut m1, mut m2) = (0.0, 0.0);
    for j in 1..=k_n {
        let d = sample.order_stat(n - j + 1).ln() - log_pivot;
        m1 += d;
        m2 += d * d;
    }
    Ok((m1 / k_n as f64, m2 / k_n as f64))
}

/// `alpha_1 = (1/k) sum_{j=1}^{k} log(X_{n-j+1,n} / X_{n-k,n})`.
pub fn hill_right(sample: &SampleData, k_n: usize) -> Result<ClassicalEstimate> {
    let (m1, _) = upper_log_moments(sample, k_n)?;
    Ok(ClassicalEstimate::new(m1, ClassicalKind::HillRight, k_n))
}

/// `alpha_0 = (1/k) sum_{j=1}^{k} log(X_{j,n} / X_{k+1,n})`.
///
/// The lowest `k + 1` order statistics must share a strict sign; for a
/// negative left tail this is Hill applied to `{-X}`.
pub fn hill_left(sample: &SampleData, k_n: usize) -> Result<ClassicalEstimate> {
    check_fraction(sample, k_n)?;
    let pivot = sample.order_stat(k_n + 1);
    if pivot == 0.0 {
        return Err(Error::Domain("pivot order statistic X_(k_n+1) is zero".into()));
    }
    let bottom = &sample.values()[..=k_n];
    if bottom.iter().any(|&x| x == 0.0 || (x > 0.0) != (pivot > 0.0)) {
        return Err(Error::Domain(
            "lower order statistics change sign; log ratios are undefined".into(),
        ));
    }
    let log_pivot = pivot.abs().ln();
    let sum: f64 = bottom[..k_n].iter().map(|x| x.abs().ln() - log_pivot).sum();
    Ok(ClassicalEstimate::new(sum / k_n as f64, ClassicalKind::HillLeft, k_n))
}

/// `gamma = log[(X_{n-k+1} - X_{n-2k+1}) / (X_{n-2k+1} - X_{n-4k+1})] / log 2`.
pub fn pickands(sample: &SampleData, k_n: usize) -> Result<ClassicalEstimate> {
    let n = sample.n();
    if k_n == 0 || 4 * k_n > n {
        return Err(Error::Domain(format!(
            "Pickands needs 1 <= k_n and 4 k_n <= n, got k_n = {k_n}, n = {n}"
        )));
    }
    let x1 = sample.order_stat(n - k_n + 1);
    let x2 = sample.order_stat(n - 2 * k_n + 1);
    let x4 = sample.order_stat(n - 4 * k_n + 1);
    let num = x1 - x2;
    let den = x2 - x4;
    if den == 0.0 {
        return Err(Error::Domain("Pickands denominator spacing is zero".into()));
    }
    let ratio = num / den;
    if ratio <= 0.0 {
        return Err(Error::Domain(format!("Pickands spacing ratio {ratio} is not positive")));
    }
    Ok(ClassicalEstimate::new(
        ratio.ln() / std::f64::consts::LN_2,
        ClassicalKind::Pickands,
        k_n,
    ))
}

/// `gamma = M1 + 1 - 1 / (2 (1 - M1^2 / M2))` with `M_r` the r-th moment of
/// the top `k_n` log-spacings.
pub fn dedh_moment(sample: &SampleData, k_n: usize) -> Result<ClassicalEstimate> {
    let (m1, m2) = upper_log_moments(sample, k_n)?;
    if m2 == 0.0 {
        return Err(Error::Domain("second log-moment is zero".into()));
    }
    let denom = 1.0 - m1 * m1 / m2;
    if denom == 0.0 {
        return Err(Error::Domain("M1^2 / M2 equals one".into()));
    }
    Ok(ClassicalEstimate::new(
        m1 + 1.0 - 0.5 / denom,
        ClassicalKind::DEdH,
        k_n,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn s(v: &[f64]) -> SampleData {
        SampleData::new(v.to_vec()).unwrap()
    }

    #[test]
    fn hill_right_geometric() {
        let e = hill_right(&s(&[1.0, E, E * E, E.powi(3)]), 3).unwrap();
        assert!((e.alpha_hat - 2.0).abs() < 1e-12);
        assert_eq!(e.nu_hat - e.alpha_hat, 1.0);
        assert_eq!(e.estimator, ClassicalKind::HillRight);
    }

    #[test]
    fn hill_right_ties_and_errors() {
        assert_eq!(hill_right(&s(&[0.5, 2.0, 2.0, 2.0]), 2).unwrap().alpha_hat, 0.0);
        assert!(matches!(hill_right(&s(&[-1.0, 0.0, 1.0, 2.0]), 2), Err(Error::Domain(_))));
        assert!(hill_right(&s(&[1.0, 2.0]), 2).is_err());
        assert!(hill_right(&s(&[1.0, 2.0]), 0).is_err());
    }

    #[test]
    fn hill_left_geometric() {
        let e = hill_left(&s(&[-E.powi(3), -E * E, -E, -1.0]), 3).unwrap();
        assert!((e.alpha_hat - 2.0).abs() < 1e-12);
        assert_eq!(hill_left(&s(&[-3.0, -3.0, -3.0, 5.0]), 2).unwrap().alpha_hat, 0.0);
        assert!(matches!(hill_left(&s(&[-2.0, -1.0, 0.0, 1.0]), 2), Err(Error::Domain(_))));
        assert!(matches!(hill_left(&s(&[-2.0, 1.0, 2.0, 3.0]), 2), Err(Error::Domain(_))));
    }

    #[test]
    fn hill_left_equals_hill_right_on_reflection() {
        let vals: Vec<f64> = (1..=50).map(|i| -(i as f64).powf(1.7) - 0.3).collect();
        let x = s(&vals);
        let l = hill_left(&x, 20).unwrap().alpha_hat;
        let r = hill_right(&x.negated(), 20).unwrap().alpha_hat;
        assert!((l - r).abs() < 1e-14);
    }

    #[test]
    fn pickands_examples() {
        // n = 4, k = 1: (X4 - X3) / (X3 - X1)
        let e = pickands(&s(&[0.0, 0.5, 1.0, 3.0]), 1).unwrap();
        assert!((e.alpha_hat - 1.0).abs() < 1e-12);
        let e = pickands(&s(&[0.0, 0.5, 1.0, 5.0]), 1).unwrap();
        assert!((e.alpha_hat - 2.0).abs() < 1e-12);
        let seq: Vec<f64> = (1..=16).map(f64::from).collect();
        let e = pickands(&s(&seq), 4).unwrap();
        assert!((e.alpha_hat + 1.0).abs() < 1e-12);
        assert!(pickands(&s(&seq), 5).is_err());
        assert!(pickands(&s(&[1.0, 1.0, 1.0, 2.0]), 1).is_err());
        assert!(pickands(&s(&[1.0, 2.0, 3.0, 3.0]), 1).is_err());
    }

    #[test]
    fn dedh_examples() {
        let e = dedh_moment(&s(&[1.0, E, E * E, E.powi(3)]), 3).unwrap();
        assert!((e.alpha_hat + 0.5).abs() < 1e-12);
        assert!(matches!(dedh_moment(&s(&[1.0, 2.0, 2.0, 2.0]), 2), Err(Error::Domain(_))));
        assert!(dedh_moment(&s(&[-1.0, -0.5, 1.0, 2.0]), 2).is_err());
    }

    #[test]
    fn scale_and_affine_invariance() {
        let vals: Vec<f64> = (1..=200).map(|i| (i as f64 / 201.0).powf(-0.6)).collect();
        let x = s(&vals);
        for c in [0.5, 3.0, 1e3] {
            let a = hill_right(&x, 30).unwrap().alpha_hat;
            let b = hill_right(&x.scaled(c), 30).unwrap().alpha_hat;
            assert!((a - b).abs() < 1e-12);
            let p = pickands(&x, 25).unwrap().alpha_hat;
            let q = pickands(&x.scaled(c).shifted(-7.5), 25).unwrap().alpha_hat;
            assert!((p - q).abs() < 1e-12);
        }
    }
}
