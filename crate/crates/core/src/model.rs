//! The Parzen density-quantile model.
//!
//! `fQ(u) = u^nu0 * L0(u)` on the left half and `(1-u)^nu1 * L1(1-u)` on the
//! right half, with `log L_i(u) = theta_i0 + 2 * sum_k theta_ik * cos(2 pi k u)`.
//! `u = 1/2` belongs to the left branch.
//!
//! The quantile function is `Q(u) = location + int_{1/2}^u dt / fQ(t)`, so the
//! default `location = 0` anchors the median at zero. Simulations that feed
//! the Hill and moment estimators use [`ParzenModel::anchored_to_left_power_law`],
//! which shifts the sample so that the left tail is an exact power law.

use std::f64::consts::PI;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::quantile::SampleData;

/// Tolerances of the quadrature fallback used by [`ParzenModel::quantile`].
pub const QUANTILE_QUAD: QuadConfig = QuadConfig::new(1e-10, 1e-13, 1_000_000);

#[derive(Debug, Clone, PartialEq)]
pub struct ParzenModel {
    nu0: f64,
    nu1: f64,
    theta_left: Vec<f64>,
    theta_right: Vec<f64>,
    location: f64,
}

impl ParzenModel {
    pub fn new(nu0: f64, nu1: f64, theta_left: Vec<f64>, theta_right: Vec<f64>) -> Result<Self> {
        for (name, nu) in [("nu0", nu0), ("nu1", nu1)] {
            if !(nu.is_finite() && nu > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {nu}")));
            }
        }
        if theta_left.iter().chain(&theta_right).any(|t| !t.is_finite()) {
            return Err(Error::Domain("cosine coefficients must be finite".into()));
        }
        Ok(Self {
            nu0,
            nu1,
            theta_left,
            theta_right,
            location: 0.0,
        })
    }

    /// Left-tail parameters only; the right tail mirrors the left.
    pub fn left_only(nu0: f64, theta_left: Vec<f64>) -> Result<Self> {
        Self::new(nu0, nu0, theta_left.clone(), theta_left)
    }

    /// Pure power law on both halves (`L0 = L1 = 1`).
    pub fn power_law(nu0: f64) -> Result<Self> {
        Self::left_only(nu0, Vec::new())
    }

    pub fn with_location(mut self, location: f64) -> Self {
        self.location = location;
        self
    }

    /// Shifts `Q` so that the left branch is `e^{-theta_00} u^{1-nu0} / (1-nu0)`
    /// (or `e^{-theta_00} log u` when `nu0 = 1`), i.e. an exact Pareto lower tail.
    ///
    /// Requires a left tail without cosine harmonics.
    pub fn anchored_to_left_power_law(self) -> Result<Self> {
        if self.theta_left.len() > 1 {
            return Err(Error::Domain(
                "power-law anchoring needs a left tail without cosine harmonics".into(),
            ));
        }
        let scale = (-self.theta_left.first().copied().unwrap_or(0.0)).exp();
        let loc = if self.nu0 == 1.0 {
            -scale * 2f64.ln()
        } else {
            scale * 0.5f64.powf(1.0 - self.nu0) / (1.0 - self.nu0)
        };
        Ok(self.with_location(loc))
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    pub fn nu1(&self) -> f64 {
        self.nu1
    }

    pub fn theta_left(&self) -> &[f64] {
        &self.theta_left
    }

    pub fn theta_right(&self) -> &[f64] {
        &self.theta_right
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    fn check_unit(u: f64) -> Result<()> {
        if u > 0.0 && u < 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("u must lie in (0, 1), got {u}")))
        }
    }

    /// `log L(x) = theta_0 + 2 sum theta_k cos(2 pi k x)`.
    fn log_slowly_varying(theta: &[f64], x: f64) -> f64 {
        let Some((&t0, rest)) = theta.split_first() else {
            return 0.0;
        };
        t0 + 2.0
            * rest
                .iter()
                .enumerate()
                .map(|(i, t)| t * (2.0 * PI * (i + 1) as f64 * x).cos())
                .sum::<f64>()
    }

    /// `d/dx log L(x)`.
    fn dlog_slowly_varying(theta: &[f64], x: f64) -> f64 {
        -4.0 * PI
            * theta
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, t)| k as f64 * t * (2.0 * PI * k as f64 * x).sin())
                .sum::<f64>()
    }

    pub fn log_fq(&self, u: f64) -> Result<f64> {
        Self::check_unit(u)?;
        Ok(self.log_fq_unchecked(u))
    }

    fn log_fq_unchecked(&self, u: f64) -> f64 {
        if u <= 0.5 {
            self.nu0 * u.ln() + Self::log_slowly_varying(&self.theta_left, u)
        } else {
            let v = 1.0 - u;
            self.nu1 * v.ln() + Self::log_slowly_varying(&self.theta_right, v)
        }
    }

    pub fn fq(&self, u: f64) -> Result<f64> {
        Ok(self.log_fq(u)?.exp())
    }

    /// Quantile density `q(u) = 1 / fQ(u)`.
    pub fn q(&self, u: f64) -> Result<f64> {
        Ok((-self.log_fq(u)?).exp())
    }

    /// `q'(u) / q(u) = -d/du log fQ(u)`.
    pub fn log_q_derivative(&self, u: f64) -> Result<f64> {
        Self::check_unit(u)?;
        Ok(if u <= 0.5 {
            -(self.nu0 / u + Self::dlog_slowly_varying(&self.theta_left, u))
        } else {
            let v = 1.0 - u;
            self.nu1 / v + Self::dlog_slowly_varying(&self.theta_right, v)
        })
    }

    /// `int_{1/2}^{x} s^{-nu} ds` for `x` in `(0, 1/2]`.
    fn power_antiderivative(nu: f64, x: f64) -> f64 {
        if nu == 1.0 {
            (2.0 * x).ln()
        } else {
            (x.powf(1.0 - nu) - 0.5f64.powf(1.0 - nu)) / (1.0 - nu)
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        Self::check_unit(u)?;
        let q0 = if u <= 0.5 {
            match self.theta_left.len() {
                0 | 1 => {
                    let scale = (-self.theta_left.first().copied().unwrap_or(0.0)).exp();
                    scale * Self::power_antiderivative(self.nu0, u)
                }
                _ => self.quantile_quadrature_unshifted(u)?,
            }
        } else {
            match self.theta_right.len() {
                0 | 1 => {
                    let scale = (-self.theta_right.first().copied().unwrap_or(0.0)).exp();
                    -scale * Self::power_antiderivative(self.nu1, 1.0 - u)
                }
                _ => self.quantile_quadrature_unshifted(u)?,
            }
        };
        Ok(q0 + self.location)
    }

    /// `Q(u)` by adaptive quadrature of `1/fQ`, regardless of closed forms.
    pub fn quantile_by_quadrature(&self, u: f64) -> Result<f64> {
        Self::check_unit(u)?;
        Ok(self.quantile_quadrature_unshifted(u)? + self.location)
    }

    fn quantile_quadrature_unshifted(&self, u: f64) -> Result<f64> {
        Ok(integrate(|t| (-self.log_fq_unchecked(t)).exp(), 0.5, u, QUANTILE_QUAD)?.value)
    }

    /// `n` draws `Q(U_i)` from a ChaCha20 stream seeded by `seed`, sorted.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleData> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        self.sample_with_rng(n, &mut rng)
    }

    pub fn sample_with_rng<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SampleData> {
        if n == 0 {
            return Err(Error::Domain("sample size must be at least 1".into()));
        }
        let values = (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile(u)
            })
            .collect::<Result<Vec<_>>>()?;
        SampleData::new(values)
    }
}
