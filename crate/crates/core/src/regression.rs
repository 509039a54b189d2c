//! Weighted least squares fit of `log fQ_hat` on `[log u, 1, 2cos(2 pi u), ...]`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quantile::{BernsteinEstimate, QuantileDensityEstimator, SampleData};
use crate::weightexpr::WeightFn;

/// Designs whose column-equilibrated normal matrix exceeds this condition
/// number are rejected as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

// Slack when converting n*a and n*b to grid indices, so 0.3 * 10 maps to 3.
const GRID_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tail {
    Left,
    Right,
}

impl FromStr for Tail {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Ok(Tail::Left),
            "right" => Ok(Tail::Right),
            _ => Err(Error::Config(format!("tail must be 'left' or 'right', got '{s}'"))),
        }
    }
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tail::Left => "left",
            Tail::Right => "right",
        })
    }
}

/// `phi(u) = (log u, 1, 2cos(2 pi u), ..., 2cos(2 pi p u))`.
pub fn basis_row(u: f64, p_tilde: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(p_tilde + 2);
    row.push(u.ln());
    row.push(1.0);
    row.extend((1..=p_tilde).map(|k| 2.0 * (2.0 * PI * k as f64 * u).cos()));
    row
}

#[derive(Debug, Clone, PartialEq)]
pub struct WlsConfig {
    a: f64,
    b: f64,
    p_tilde: usize,
    weight: WeightFn,
    tail: Tail,
    n: usize,
}

impl WlsConfig {
    pub fn new(a: f64, b: f64, p_tilde: usize, weight: WeightFn, tail: Tail, n: usize) -> Result<Self> {
        if !(a > 0.0 && a < b && b < 1.0) {
            return Err(Error::Config(format!("need 0 < a < b < 1, got a = {a}, b = {b}")));
        }
        if n == 0 {
            return Err(Error::Config("grid denominator n must be positive".into()));
        }
        let cfg = Self {
            a,
            b,
            p_tilde,
            weight,
            tail,
            n,
        };
        let points = cfg.grid_len();
        if points < p_tilde + 2 {
            return Err(Error::Config(format!(
                "grid on [{a}, {b}] with n = {n} has {points} points, need at least {}",
                p_tilde + 2
            )));
        }
        cfg.weight.check_nonnegative(a, b)?;
        Ok(cfg)
    }

    /// Default setting: `a = 0.001`, `b = 0.4`, left tail.
    pub fn left_default(n: usize, p_tilde: usize, weight: WeightFn) -> Result<Self> {
        Self::new(0.001, 0.4, p_tilde, weight, Tail::Left, n)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn p_tilde(&self) -> usize {
        self.p_tilde
    }

    pub fn weight(&self) -> &WeightFn {
        &self.weight
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same configuration with a different weight; revalidates.
    pub fn with_weight(&self, weight: WeightFn) -> Result<Self> {
        Self::new(self.a, self.b, self.p_tilde, weight, self.tail, self.n)
    }

    pub fn with_tail(&self, tail: Tail) -> Self {
        Self { tail, ..self.clone() }
    }

    /// Inclusive index range `ceil(n a) ..= floor(n b)`.
    pub fn grid_indices(&self) -> (usize, usize) {
        let n = self.n as f64;
        let lo = ((n * self.a - GRID_SNAP).ceil().max(1.0)) as usize;
        let hi = (n * self.b + GRID_SNAP).floor() as usize;
        (lo, hi)
    }

    fn grid_len(&self) -> usize {
        let (lo, hi) = self.grid_indices();
        (hi + 1).saturating_sub(lo)
    }

    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = self.grid_indices();
        (lo..=hi).map(|j| j as f64 / self.n as f64).collect()
    }
}

/// Grid, design matrix (one row per grid point) and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub grid: Vec<f64>,
    pub x: DMatrix<f64>,
    pub w: Vec<f64>,
}

pub fn build_design(cfg: &WlsConfig) -> Result<Design> {
    let grid = cfg.grid();
    let cols = cfg.p_tilde + 2;
    let mut x = DMatrix::zeros(grid.len(), cols);
    for (i, &u) in grid.iter().enumerate() {
        for (c, v) in basis_row(u, cfg.p_tilde).into_iter().enumerate() {
            x[(i, c)] = v;
        }
    }
    let w = grid.iter().map(|&u| cfg.weight.eval(u)).collect::<Result<Vec<_>>>()?;
    Ok(Design { grid, x, w })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WlsSolution {
    pub coefficients: Vec<f64>,
    /// Condition number of the column-equilibrated weighted normal matrix.
    pub condition_number: f64,
}

/// Minimises `sum_j w_j (y_j - x_j' beta)^2`.
///
/// Rows with zero weight are dropped. The remaining `sqrt(w) X` is
/// column-equilibrated and solved by Householder QR, so `X'WX` is never formed.
pub fn wls_solve(x: &DMatrix<f64>, w: &[f64], y: &[f64]) -> Result<WlsSolution> {
    let (rows, cols) = x.shape();
    if w.len() != rows || y.len() != rows {
        return Err(Error::Config(format!(
            "dimension mismatch: X is {rows}x{cols}, w has {}, y has {}",
            w.len(),
            y.len()
        )));
    }
    if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Config(format!("weights must be finite and nonnegative, got {bad}")));
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("responses must be finite, got {bad}")));
    }
    let active: Vec<usize> = (0..rows).filter(|&i| w[i] > 0.0).collect();
    if cols == 0 || active.len() < cols {
        return Err(Error::SingularDesign {
            condition: f64::INFINITY,
        });
    }

    let m = active.len();
    let mut a = DMatrix::zeros(m, cols);
    let mut rhs = DVector::zeros(m);
    for (r, &i) in active.iter().enumerate() {
        let sw = w[i].sqrt();
        for c in 0..cols {
            a[(r, c)] = sw * x[(i, c)];
        }
        rhs[r] = sw * y[i];
    }
    let mut col_scale = vec![0.0; cols];
    for (c, scale) in col_scale.iter_mut().enumerate() {
        let norm = a.column(c).norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::SingularDesign {
                condition: f64::INFINITY,
            });
        }
        *scale = 1.0 / norm;
        a.column_mut(c).scale_mut(*scale);
    }

    householder_qr_in_place(&mut a, &mut rhs);
    let r = a.view((0, 0), (cols, cols)).upper_triangle();
    let sv = r.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let kappa = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let condition = kappa * kappa;
    if condition.is_nan() || condition > CONDITION_LIMIT {
        return Err(Error::SingularDesign { condition });
    }

    // back substitution R z = Q'b
    let mut z = vec![0.0; cols];
    for i in (0..cols).rev() {
        let mut acc = rhs[i];
        for j in i + 1..cols {
            acc -= r[(i, j)] * z[j];
        }
        z[i] = acc / r[(i, i)];
    }
    let coefficients = z.iter().zip(&col_scale).map(|(zi, s)| zi * s).collect();
    Ok(WlsSolution {
        coefficients,
        condition_number: condition,
    })
}

/// Reduces `a` to upper-triangular `R` and applies the same reflections to `b`.
fn householder_qr_in_place(a: &mut DMatrix<f64>, b: &mut DVector<f64>) {
    let (m, n) = a.shape();
    for k in 0..n.min(m) {
        let norm = a.view((k, k), (m - k, 1)).norm();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * a[(i, j)]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                a[(i, j)] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..m {
            b[i] -= f * v[i - k];
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub nu_hat: f64,
    /// `theta_0 .. theta_p`.
    pub theta_hat: Vec<f64>,
    pub grid: Vec<f64>,
    pub responses: Vec<f64>,
    pub fitted: Vec<f64>,
    pub condition_number: f64,
    pub weight_sum: f64,
}

impl TailFit {
    pub fn residuals(&self) -> Vec<f64> {
        self.responses.iter().zip(&self.fitted).map(|(y, f)| y - f).collect()
    }
}

/// Fits the tail exponent from an existing quantile-density estimate.
pub fn fit_tail<E: QuantileDensityEstimator + ?Sized>(est: &E, cfg: &WlsConfig) -> Result<TailFit> {
    let (lo, hi) = est.support();
    if cfg.a < lo || cfg.b > hi || 1.0 - cfg.b < lo || 1.0 - cfg.a > hi {
        return Err(Error::Config(format!(
            "[a, b] = [{}, {}] must lie inside the estimator support [{lo}, {hi}]",
            cfg.a, cfg.b
        )));
    }
    let design = build_design(cfg)?;
    let responses = design
        .grid
        .iter()
        .map(|&u| match cfg.tail {
            Tail::Left => est.log_fq_hat(u),
            Tail::Right => est.log_fq_hat(1.0 - u),
        })
        .collect::<Result<Vec<_>>>()?;
    fit_responses(design, responses)
}

/// Solves the regression for given responses on the design of `cfg`.
pub fn fit_responses(design: Design, responses: Vec<f64>) -> Result<TailFit> {
    let sol = wls_solve(&design.x, &design.w, &responses)?;
    let beta = DVector::from_vec(sol.coefficients.clone());
    let fitted = (&design.x * &beta).iter().copied().collect();
    Ok(TailFit {
        nu_hat: sol.coefficients[0],
        theta_hat: sol.coefficients[1..].to_vec(),
        grid: design.grid,
        responses,
        fitted,
        condition_number: sol.condition_number,
        weight_sum: design.w.iter().sum(),
    })
}

/// Bernstein estimate with `k` cells and trim `epsilon`, then the WLS fit.
pub fn estimate_tail(sample: &SampleData, cfg: &WlsConfig, k: usize, epsilon: f64) -> Result<TailFit> {
    let est = BernsteinEstimate::fit(sample, k, epsilon)?;
    fit_tail(&est, cfg)
}
