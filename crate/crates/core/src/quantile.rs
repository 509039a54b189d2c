//! Empirical quantiles and the Bernstein polynomial quantile-density estimator.

use crate::error::{Error, Result};

/// `q_hat(u)` values at or below this are treated as degenerate when taking logs.
pub const DENSITY_FLOOR: f64 = 1e-300;

// Binomial weights below this fraction of the modal weight are dropped.
const BINOMIAL_CUTOFF: f64 = 1e-20;

/// Order statistics `X_{1,n} <= ... <= X_{n,n}` of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleData {
    values: Vec<f64>,
}

impl SampleData {
    /// Sorts `values` ascending. Rejects empty and non-finite input.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("sample must not be empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("sample contains non-finite value {v}")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `X_{j,n}` with 1-based `j`.
    pub fn order_stat(&self, j: usize) -> f64 {
        self.values[j - 1]
    }

    /// The reflected sample `{-X_i}`, sorted.
    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().rev().map(|v| -v).collect(),
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// `{c * X_i}` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0, "scale factor must be positive");
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `Q_n(t) = X_{ceil(nt), n}`, the left-continuous inverse of the ECDF.
    pub fn empirical_quantile(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Domain(format!("t must lie in (0, 1], got {t}")));
        }
        let n = self.n();
        let j = ((n as f64 * t).ceil() as usize).clamp(1, n);
        Ok(self.values[j - 1])
    }
}

/// A smoothed estimate of the quantile density `q = Q'` on a closed
/// sub-interval of `(0, 1)`.
///
/// Implementations are expected to be nonnegative on their support. Only
/// the Bernstein polynomial estimator ships with the crate.
pub trait QuantileDensityEstimator {
    /// `(lo, hi)` on which [`eval`](Self::eval) is defined.
    fn support(&self) -> (f64, f64);

    fn eval(&self, u: f64) -> Result<f64>;

    /// The regression response `log fQ_hat(u) = -log q_hat(u)`.
    fn log_fq_hat(&self, u: f64) -> Result<f64> {
        let q = self.eval(u)?;
        if q <= DENSITY_FLOOR {
            return Err(Error::DegenerateDensity { u, value: q });
        }
        Ok(-q.ln())
    }
}

/// Bernstein polynomial estimator built from `k` empirical quantile
/// increments on `t_j = eps + (j/k)(1 - 2 eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinEstimate {
    epsilon: f64,
    increments: Vec<f64>,
}

impl BernsteinEstimate {
    pub fn fit(sample: &SampleData, k: usize, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        let len = 1.0 - 2.0 * epsilon;
        let knots = (0..=k)
            .map(|j| sample.empirical_quantile(epsilon + j as f64 / k as f64 * len))
            .collect::<Result<Vec<_>>>()?;
        let increments = knots.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { epsilon, increments })
    }

    /// Builds the estimator directly from quantile increments.
    pub fn from_increments(increments: Vec<f64>, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if increments.is_empty() {
            return Err(Error::Domain("need at least one increment".into()));
        }
        if increments.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::Domain("increments must be finite and nonnegative".into()));
        }
        Ok(Self { epsilon, increments })
    }

    pub fn k(&self) -> usize {
        self.increments.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `L_eps = 1 - 2 eps`.
    pub fn l_eps(&self) -> f64 {
        1.0 - 2.0 * self.epsilon
    }

    /// `q_hat(u) = (k / L_eps) * sum_j d_j * b_{j,k-1}(s)`, `s = (u - eps) / L_eps`,
    /// where `b_{j,m}` are binomial probabilities.
    ///
    /// The binomial weights are generated from the modal term by the ratio
    /// recurrence and normalised by their sum, which is exactly one in exact
    /// arithmetic. No factorials or powers of `L_eps` are formed.
    pub fn eval(&self, u: f64) -> Result<f64> {
        let (lo, hi) = (self.epsilon, 1.0 - self.epsilon);
        if !(u >= lo && u <= hi) {
            return Err(Error::Domain(format!("u = {u} outside [{lo}, {hi}]")));
        }
        let k = self.k();
        let m = k - 1;
        let scale = k as f64 / self.l_eps();
        let s = ((u - self.epsilon) / self.l_eps()).clamp(0.0, 1.0);
        if m == 0 || s == 0.0 {
            return Ok(scale * self.increments[0]);
        }
        if s == 1.0 {
            return Ok(scale * self.increments[m]);
        }

        let odds = s / (1.0 - s);
        let mode = (((m + 1) as f64 * s).floor() as usize).min(m);
        let mut num = self.increments[mode];
        let mut den = 1.0;

        let mut r = 1.0;
        for j in mode..m {
            r *= (m - j) as f64 / (j + 1) as f64 * odds;
            if r < BINOMIAL_CUTOFF {
                break;
            }
            num += r * self.increments[j + 1];
            den += r;
        }
        let mut r = 1.0;
        for j in (1..=mode).rev() {
            r *= j as f64 / (m - j + 1) as f64 / odds;
            if r < BINOMIAL_CUTOFF {
                break;
            }
            num += r * self.increments[j - 1];
            den += r;
        }
        Ok(scale * num / den)
    }
}

impl QuantileDensityEstimator for BernsteinEstimate {
    fn support(&self) -> (f64, f64) {
        (self.epsilon, 1.0 - self.epsilon)
    }

    fn eval(&self, u: f64) -> Result<f64> {
        BernsteinEstimate::eval(self, u)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("epsilon must lie in (0, 1/2), got {epsilon}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadConfig};
    use proptest::prelude::*;

    fn sample(v: &[f64]) -> SampleData {
        SampleData::new(v.to_vec()).unwrap()
    }

    /// Direct evaluation of the Bernstein sum with explicit binomial
    /// coefficients; only usable for small k.
    fn naive_eval(est: &BernsteinEstimate, u: f64) -> f64 {
        let k = est.k();
        let eps = est.epsilon();
        let l = est.l_eps();
        let mut total = 0.0;
        for (j, d) in est.increments().iter().enumerate() {
            let mut binom = 1.0;
            for i in 0..j {
                binom *= (k - 1 - i) as f64 / (i + 1) as f64;
            }
            total += d * k as f64
                * binom
                * (u - eps).powi(j as i32)
                * (1.0 - eps - u).powi((k - 1 - j) as i32);
        }
        total / l.powi(k as i32)
    }

    #[test]
    fn empirical_quantile_examples() {
        let s = sample(&[4.0, 2.0, 1.0, 3.0]);
        assert_eq!(s.empirical_quantile(0.5).unwrap(), 2.0);
        assert_eq!(s.empirical_quantile(1.0).unwrap(), 4.0);
        assert_eq!(s.empirical_quantile(0.01).unwrap(), 1.0);
        assert_eq!(s.empirical_quantile(0.51).unwrap(), 3.0);
        let one = sample(&[7.0]);
        for t in [1e-9, 0.3, 1.0] {
            assert_eq!(one.empirical_quantile(t).unwrap(), 7.0);
        }
        assert!(s.empirical_quantile(0.0).is_err());
        assert!(s.empirical_quantile(1.0001).is_err());
    }

    #[test]
    fn sample_validation() {
        assert!(SampleData::new(vec![]).is_err());
        assert!(SampleData::new(vec![1.0, f64::INFINITY]).is_err());
        let s = sample(&[3.0, -1.0, 2.0]);
        assert_eq!(s.values(), &[-1.0, 2.0, 3.0]);
        assert_eq!(s.negated().values(), &[-3.0, -2.0, 1.0]);
    }

    #[test]
    fn fit_examples() {
        let s = sample(&[1.0, 2.0]);
        let est = BernsteinEstimate::fit(&s, 1, 0.25).unwrap();
        assert_eq!(est.increments(), &[1.0]);
        // k = 1: q_hat = d / L_eps
        assert!((est.eval(0.4).unwrap() - 1.0 / 0.5).abs() < 1e-15);

        let c = sample(&[3.5; 20]);
        let est = BernsteinEstimate::fit(&c, 7, 0.1).unwrap();
        assert!(est.increments().iter().all(|&d| d == 0.0));
        assert_eq!(est.eval(0.5).unwrap(), 0.0);
        assert!(matches!(est.log_fq_hat(0.5), Err(Error::DegenerateDensity { .. })));

        assert!(BernsteinEstimate::fit(&s, 1, 0.5).is_err());
        assert!(BernsteinEstimate::fit(&s, 1, 0.0).is_err());
        assert!(BernsteinEstimate::fit(&s, 0, 0.1).is_err());
    }

    #[test]
    fn default_configuration_has_k_increments() {
        let vals: Vec<f64> = (0..700).map(|i| ((i * 37) % 700) as f64).collect();
        let est = BernsteinEstimate::fit(&sample(&vals), 700, 0.001).unwrap();
        assert_eq!(est.k(), 700);
        assert!(est.increments().iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn eval_domain() {
        let est = BernsteinEstimate::from_increments(vec![0.1; 5], 0.05).unwrap();
        assert!(est.eval(0.05).is_ok());
        assert!(est.eval(0.95).is_ok());
        assert!(est.eval(0.049).is_err());
        assert!(est.eval(0.951).is_err());
    }

    #[test]
    fn uniform_increments_give_unit_density() {
        let eps = 0.01;
        for k in [1usize, 2, 10, 100, 700] {
            let l = 1.0 - 2.0 * eps;
            let est = BernsteinEstimate::from_increments(vec![l / k as f64; k], eps).unwrap();
            for i in 0..=50 {
                let u = eps + l * i as f64 / 50.0;
                assert!((est.eval(u).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn log_fq_hat_values() {
        let l = 0.8;
        let est = BernsteinEstimate::from_increments(vec![l / 4.0; 4], 0.1).unwrap();
        assert!(est.log_fq_hat(0.3).unwrap().abs() < 1e-14);
        let est = BernsteinEstimate::from_increments(vec![std::f64::consts::E * l / 4.0; 4], 0.1).unwrap();
        assert!((est.log_fq_hat(0.3).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn integral_equals_total_increment() {
        let vals: Vec<f64> = (1..=300).map(|i| (i as f64 / 301.0).powf(-1.3)).collect();
        let est = BernsteinEstimate::fit(&sample(&vals), 120, 0.02).unwrap();
        let total: f64 = est.increments().iter().sum();
        let r = integrate(|u| est.eval(u).unwrap(), 0.02, 0.98, QuadConfig::default()).unwrap();
        assert!((r.value - total).abs() <= 1e-6 * total.max(1.0), "{} vs {total}", r.value);
    }

    #[test]
    fn uniform_grid_sample_is_nearly_flat() {
        let vals: Vec<f64> = (1..=700).map(|i| i as f64 / 700.0).collect();
        let est = BernsteinEstimate::fit(&sample(&vals), 700, 0.001).unwrap();
        let worst = (0..=400)
            .map(|i| 0.1 + 0.8 * i as f64 / 400.0)
            .map(|u| (est.eval(u).unwrap() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 0.05, "sup |q_hat - 1| = {worst}");
    }

    #[test]
    fn dyadic_shift_and_scale_are_exact() {
        let vals: Vec<f64> = (0..64).map(|i| ((i * 13) % 64) as f64 / 8.0).collect();
        let s = sample(&vals);
        let base = BernsteinEstimate::fit(&s, 20, 0.05).unwrap();
        let shifted = BernsteinEstimate::fit(&s.shifted(16.0), 20, 0.05).unwrap();
        let scaled = BernsteinEstimate::fit(&s.scaled(4.0), 20, 0.05).unwrap();
        for i in 0..=20 {
            let u = (0.05 + 0.9 * i as f64 / 20.0).min(0.95);
            assert_eq!(base.eval(u).unwrap(), shifted.eval(u).unwrap());
            assert_eq!(4.0 * base.eval(u).unwrap(), scaled.eval(u).unwrap());
        }
    }

    proptest! {
        #[test]
        fn recurrence_matches_naive_sum(
            incs in proptest::collection::vec(0.0f64..10.0, 1..25),
            eps in 0.001f64..0.3,
            frac in 0.0f64..=1.0,
        ) {
            let est = BernsteinEstimate::from_increments(incs, eps).unwrap();
            let u = eps + frac * est.l_eps();
            let fast = est.eval(u).unwrap();
            let slow = naive_eval(&est, u);
            prop_assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1.0), "{} vs {}", fast, slow);
        }

        #[test]
        fn estimate_is_nonnegative(
            raw in proptest::collection::vec(-1e3f64..1e3, 1..200),
            k in 1usize..150,
            frac in 0.0f64..=1.0,
        ) {
            let s = SampleData::new(raw).unwrap();
            let est = BernsteinEstimate::fit(&s, k, 0.01).unwrap();
            prop_assert!(est.eval(0.01 + frac * 0.98).unwrap() >= 0.0);
        }

        #[test]
        fn shift_and_scale_close(
            raw in proptest::collection::vec(-50f64..50.0, 5..120),
            c in 0.1f64..20.0,
            shift in -100f64..100.0,
            frac in 0.0f64..=1.0,
        ) {
            let s = SampleData::new(raw).unwrap();
            let u = 0.02 + frac * 0.96;
            let base = BernsteinEstimate::fit(&s, 30, 0.02).unwrap().eval(u).unwrap();
            let moved = BernsteinEstimate::fit(&s.shifted(shift), 30, 0.02).unwrap().eval(u).unwrap();
            let scaled = BernsteinEstimate::fit(&s.scaled(c), 30, 0.02).unwrap().eval(u).unwrap();
            prop_assert!((base - moved).abs() <= 1e-9 * (1.0 + base.abs() + shift.abs()));
            prop_assert!((c * base - scaled).abs() <= 1e-9 * (1.0 + scaled.abs()));
        }
    }
}
