//! Asymptotic variance of the weighted least squares tail exponent.
//!
//! With `phi(u) = (log u, 1, 2cos(2 pi u), ..., 2cos(2 pi p u))`, the limit
//! Gram matrix is `M = int_a^b phi phi' R du`. The first row `v` of `M^{-1}`
//! defines the influence function `G_R(u) = R(u) v' phi(u)`, and
//!
//! ```text
//! V = int G_R^2 + int int G_R(u) G_R(v) (1 + [min(u,v) - uv] h(u) h(v)) du dv
//! ```
//!
//! with `h = q'/q`. The double integral is split along the diagonal and each
//! triangle is integrated by iterated adaptive quadrature.

use nalgebra::{DMatrix, DVector};
use rayon::join;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ParzenModel;
use crate::quadrature::{integrate, integrate_iterated, QuadConfig};
use crate::regression::{basis_row, CONDITION_LIMIT};
use crate::weightexpr::WeightFn;

/// One-dimensional integrals (Gram entries, `int G_R^2`).
pub const QUAD_1D: QuadConfig = QuadConfig::new(1e-10, 1e-12, 1_000_000);
/// Each diagonal triangle of the double integral.
pub const QUAD_2D: QuadConfig = QuadConfig::new(1e-8, 1e-11, 1_000_000);
/// Inner integrals of the iterated scheme.
const QUAD_INNER: QuadConfig = QuadConfig::new(1e-12, 1e-13, 100_000);

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a > 0.0 && a < b && b < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("need 0 < a < b < 1, got a = {a}, b = {b}")))
    }
}

/// `R(u)` for use inside integrands; evaluation errors become NaN so the
/// quadrature reports them.
fn weight_at(r: &WeightFn, u: f64) -> f64 {
    r.eval(u).unwrap_or(f64::NAN)
}

/// Gram matrix `int_a^b phi_r phi_s R du` by adaptive quadrature.
pub fn limit_matrix_with(a: f64, b: f64, r: &WeightFn, p_tilde: usize, quad: QuadConfig) -> Result<DMatrix<f64>> {
    check_interval(a, b)?;
    r.check_nonnegative(a, b)?;
    let dim = p_tilde + 2;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let entry = integrate(
                |u| {
                    let phi = basis_row(u, p_tilde);
                    phi[i] * phi[j] * weight_at(r, u)
                },
                a,
                b,
                quad,
            )?
            .value;
            m[(i, j)] = entry;
            m[(j, i)] = entry;
        }
    }
    Ok(m)
}

pub fn limit_matrix(a: f64, b: f64, r: &WeightFn, p_tilde: usize) -> Result<DMatrix<f64>> {
    limit_matrix_with(a, b, r, p_tilde, QUAD_1D)
}

/// `n^{-1} X'WX` on the grid `j/n`, `j = ceil(na)..=floor(nb)`.
pub fn riemann_matrix(a: f64, b: f64, r: &WeightFn, p_tilde: usize, n: usize) -> Result<DMatrix<f64>> {
    check_interval(a, b)?;
    let dim = p_tilde + 2;
    let mut m = DMatrix::zeros(dim, dim);
    let lo = (n as f64 * a).ceil().max(1.0) as usize;
    let hi = (n as f64 * b).floor() as usize;
    for j in lo..=hi {
        let u = j as f64 / n as f64;
        let phi = DVector::from_vec(basis_row(u, p_tilde));
        m += &phi * phi.transpose() * r.eval(u)?;
    }
    Ok(m / n as f64)
}

/// 2-norm condition number via singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    }
}

/// First row of `M^{-1}` by full-pivot LU, with the condition number of `M`.
fn first_row_of_inverse(m: &DMatrix<f64>) -> Result<(Vec<f64>, f64)> {
    let cond = condition_number(m);
    if cond.is_nan() || cond > CONDITION_LIMIT {
        return Err(Error::SingularDesign { condition: cond });
    }
    let lu = m.clone().full_piv_lu();
    let mut e1 = DVector::zeros(m.nrows());
    e1[0] = 1.0;
    // M is symmetric, so the first row of M^{-1} is the solution of M v = e1.
    let v = lu.solve(&e1).ok_or(Error::SingularDesign { condition: cond })?;
    Ok((v.iter().copied().collect(), cond))
}

/// `G_R(u) = R(u) (v* log u + v_0 + 2 sum_k v_k cos(2 pi k u))`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceFunction {
    weight: WeightFn,
    v_row: Vec<f64>,
    p_tilde: usize,
    a: f64,
    b: f64,
}

impl InfluenceFunction {
    pub fn v_row(&self) -> &[f64] {
        &self.v_row
    }

    pub fn weight(&self) -> &WeightFn {
        &self.weight
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        let phi = basis_row(u, self.p_tilde);
        let lin: f64 = phi.iter().zip(&self.v_row).map(|(p, v)| p * v).sum();
        Ok(self.weight.eval(u)? * lin)
    }

    fn eval_or_nan(&self, u: f64) -> f64 {
        self.eval(u).unwrap_or(f64::NAN)
    }
}

pub fn g_r(a: f64, b: f64, r: &WeightFn, p_tilde: usize) -> Result<InfluenceFunction> {
    let m = limit_matrix(a, b, r, p_tilde)?;
    let (v_row, _) = first_row_of_inverse(&m)?;
    Ok(InfluenceFunction {
        weight: r.clone(),
        v_row,
        p_tilde,
        a,
        b,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    /// Row-major `M(a, b, R)`.
    pub m: Vec<Vec<f64>>,
    /// First row of `M^{-1}`: `(v*, v_0, ..., v_p)`.
    pub v_row: Vec<f64>,
    pub variance: f64,
    pub cond_m: f64,
    pub quad_tol: f64,
    /// `int G_R^2`.
    pub single_integral: f64,
    /// Triangle `v < u` of the double integral.
    pub lower_triangle: f64,
    /// Triangle `v > u` of the double integral.
    pub upper_triangle: f64,
}

/// `V` for the left tail of `model` with weight `r` on `[a, b]`.
pub fn asymptotic_variance(model: &ParzenModel, a: f64, b: f64, r: &WeightFn, p_tilde: usize) -> Result<VarianceReport> {
    check_interval(a, b)?;
    if b > 0.5 {
        return Err(Error::Config(format!(
            "the left-tail variance needs b <= 1/2, got b = {b}"
        )));
    }
    let m = limit_matrix(a, b, r, p_tilde)?;
    let (v_row, cond_m) = first_row_of_inverse(&m)?;
    let g = InfluenceFunction {
        weight: r.clone(),
        v_row: v_row.clone(),
        p_tilde,
        a,
        b,
    };
    let h = |u: f64| model.log_q_derivative(u).unwrap_or(f64::NAN);
    let kernel = |u: f64, v: f64| {
        let cov = u.min(v) - u * v;
        g.eval_or_nan(u) * g.eval_or_nan(v) * (1.0 + cov * h(u) * h(v))
    };

    let single = integrate(|u| g.eval_or_nan(u).powi(2), a, b, QUAD_1D)?.value;
    let (lower, upper) = join(
        || integrate_iterated(kernel, a, b, |_| a, |u| u, QUAD_2D, QUAD_INNER),
        || integrate_iterated(kernel, a, b, |u| u, |_| b, QUAD_2D, QUAD_INNER),
    );
    let (lower, upper) = (lower?.value, upper?.value);

    Ok(VarianceReport {
        m: m.row_iter().map(|row| row.iter().copied().collect()).collect(),
        v_row,
        variance: single + lower + upper,
        cond_m,
        quad_tol: QUAD_2D.abs_tol,
        single_integral: single,
        lower_triangle: lower,
        upper_triangle: upper,
    })
}

/// The weight functions compared in the limiting-variance table.
pub const TABLE_WEIGHTS: [&str; 5] = ["1+cos(u)", "exp(-u)", "-log(u)", "1/u", "1"];
/// Tail exponents of the limiting-variance table.
pub const TABLE_NUS: [f64; 4] = [1.2, 1.8, 1.667, 2.25];
/// `(a, b)` rows of the limiting-variance table.
pub const TABLE_INTERVALS: [(f64, f64); 3] = [(0.1, 0.4), (0.1, 0.3), (0.2, 0.3)];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceCell {
    pub nu0: f64,
    pub a: f64,
    pub b: f64,
    pub weight: String,
    pub variance: f64,
    pub cond_m: f64,
}

/// Every (nu0, interval, weight) cell for the submodel `L0(u) = exp{2 cos(2 pi u)}`
/// with one harmonic, in table order. Cells are computed in parallel.
pub fn variance_table() -> Result<Vec<VarianceCell>> {
    use rayon::prelude::*;
    let cells: Vec<(f64, (f64, f64), &str)> = TABLE_NUS
        .iter()
        .flat_map(|&nu| {
            TABLE_INTERVALS
                .iter()
                .flat_map(move |&ab| TABLE_WEIGHTS.iter().map(move |&w| (nu, ab, w)))
        })
        .collect();
    cells
        .par_iter()
        .map(|&(nu, (a, b), w)| {
            let model = ParzenModel::left_only(nu, vec![0.0, 1.0])?;
            let weight = WeightFn::parse(w)?;
            let rep = asymptotic_variance(&model, a, b, &weight, 1)?;
            Ok(VarianceCell {
                nu0: nu,
                a,
                b,
                weight: w.to_string(),
                variance: rep.variance,
                cond_m: rep.cond_m,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> WeightFn {
        WeightFn::parse(s).unwrap()
    }

    #[test]
    fn unit_weight_entries() {
        let m = limit_matrix(0.1, 0.4, &w("1"), 1).unwrap();
        assert!((m[(1, 1)] - 0.3).abs() < 1e-12);
        let anti = |u: f64| u * u.ln() - u;
        assert!((m[(0, 1)] - (anti(0.4) - anti(0.1))).abs() < 1e-12);
        assert_eq!(m[(0, 1)], m[(1, 0)]);
    }

    #[test]
    fn zero_weight_is_singular() {
        let e = g_r(0.1, 0.4, &w("0"), 1).unwrap_err();
        assert!(matches!(e, Error::SingularDesign { .. }));
        let model = ParzenModel::left_only(1.2, vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            asymptotic_variance(&model, 0.1, 0.4, &w("0"), 1),
            Err(Error::SingularDesign { .. })
        ));
    }

    #[test]
    fn influence_function_orthogonality() {
        for weight in ["1", "1/u", "exp(-u)"] {
            let g = g_r(0.1, 0.4, &w(weight), 2).unwrap();
            let against = |k: usize| {
                integrate(
                    |u| g.eval(u).unwrap() * basis_row(u, 2)[k],
                    0.1,
                    0.4,
                    QUAD_1D,
                )
                .unwrap()
                .value
            };
            assert!((against(0) - 1.0).abs() < 1e-6, "{weight}");
            for k in 1..4 {
                assert!(against(k).abs() < 1e-6, "{weight} k={k}");
            }
        }
    }

    #[test]
    fn influence_function_scale_invariance() {
        let r = w("1+cos(u)");
        let g1 = g_r(0.1, 0.3, &r, 1).unwrap();
        let g2 = g_r(0.1, 0.3, &r.scaled(300.0), 1).unwrap();
        for i in 0..=20 {
            let u = 0.1 + 0.2 * i as f64 / 20.0;
            let (x, y) = (g1.eval(u).unwrap(), g2.eval(u).unwrap());
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn report_invariants() {
        let model = ParzenModel::left_only(1.2, vec![0.0, 1.0]).unwrap();
        let rep = asymptotic_variance(&model, 0.1, 0.4, &w("1"), 1).unwrap();
        let m = DMatrix::from_fn(3, 3, |i, j| rep.m[i][j]);
        assert!((m.clone() - m.transpose()).abs().max() <= 1e-12 * m.abs().max());
        let v = DVector::from_vec(rep.v_row.clone());
        let e1 = m * v;
        assert!((e1[0] - 1.0).abs() < 1e-8 && e1[1].abs() < 1e-8 && e1[2].abs() < 1e-8);
        assert!((rep.lower_triangle - rep.upper_triangle).abs() < 1e-8 * rep.variance.abs().max(1.0));
        assert!(rep.variance > 0.0);
    }

    #[test]
    fn riemann_sums_approach_limit() {
        for weight in ["1", "1/u", "u/300"] {
            let r = w(weight);
            let m = limit_matrix(0.1, 0.4, &r, 1).unwrap();
            let gap = |n| (riemann_matrix(0.1, 0.4, &r, 1, n).unwrap() - &m).abs().max() / m.abs().max();
            let (coarse, fine) = (gap(700), gap(7000));
            assert!(coarse <= 0.02, "{weight}: {coarse}");
            assert!(fine <= 0.002 && fine < coarse, "{weight}: {fine}");
        }
    }

    #[test]
    fn interval_checks() {
        let model = ParzenModel::power_law(1.5).unwrap();
        assert!(asymptotic_variance(&model, 0.0, 0.4, &w("1"), 1).is_err());
        assert!(asymptotic_variance(&model, 0.3, 0.2, &w("1"), 1).is_err());
        assert!(asymptotic_variance(&model, 0.1, 0.6, &w("1"), 1).is_err());
        assert!(limit_matrix(0.1, 0.4, &w("u-0.3"), 1).is_err());
    }
}
