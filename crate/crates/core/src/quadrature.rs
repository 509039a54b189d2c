//! Globally adaptive Gauss-Kronrod (G7/K15) quadrature.
//!
//! Panels are kept in a max-heap keyed on their error estimate; the worst
//! panel is bisected until the summed error meets the tolerance or the
//! panel budget runs out. Error estimates use the QUADPACK rescaling of the
//! Gauss/Kronrod difference, floored at the roundoff level of each panel.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Tolerances and budget for [`integrate`].
///
/// Convergence is declared when the estimated absolute error is at most
/// `max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl QuadConfig {
    pub const fn new(abs_tol: f64, rel_tol: f64, max_panels: usize) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_panels,
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self::new(1e-10, 1e-12, 1_000_000)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Roundoff floor of this panel's error estimate.
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval(f, center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let value = res_k * half;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    Ok(Panel {
        a,
        b,
        value,
        error: err,
        floor,
    })
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::QuadratureFailure(format!(
            "integrand is not finite at x = {x}"
        )))
    }
}

/// Integrates `f` over `[a, b]` (either orientation).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<Integral> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            panels: 0,
            evaluations: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, cfg)?;
        return Ok(Integral {
            value: -r.value,
            ..r
        });
    }

    let first = kronrod15(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut total_floor = first.floor;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        // Below the summed roundoff floors no refinement can help, which
        // happens when the integrand cancels heavily.
        let converged = |v: f64, e: f64, fl: f64| e <= cfg.abs_tol.max(cfg.rel_tol * v.abs()).max(2.0 * fl);
        if converged(total, total_err, total_floor) {
            // The running totals drift; confirm against a fresh sum.
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
            total_floor = heap.iter().map(|p| p.floor).sum();
            if converged(total, total_err, total_floor) {
                break;
            }
        }
        if heap.len() >= cfg.max_panels {
            return Err(Error::QuadratureFailure(format!(
                "panel budget {} exhausted on [{a}, {b}]: value {total:e}, error {total_err:e}",
                cfg.max_panels
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure(format!(
                "panel [{}, {}] cannot be bisected further, error {total_err:e}",
                worst.a, worst.b
            )));
        }
        let left = kronrod15(&mut f, worst.a, mid)?;
        let right = kronrod15(&mut f, mid, worst.b)?;
        evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_floor += left.floor + right.floor - worst.floor;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum in panel order so the result does not carry the drift of the
    // running totals.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Ok(Integral {
        value,
        error,
        panels: panels.len(),
        evaluations,
    })
}

/// Iterated integral `int_a^b int_{lo(u)}^{hi(u)} f(u, v) dv du`.
///
/// The inner integral is evaluated adaptively for every outer node with
/// `inner` tolerances; an inner failure aborts the whole integral.
pub fn integrate_iterated<F, L, H>(
    f: F,
    a: f64,
    b: f64,
    lo: L,
    hi: H,
    outer: QuadConfig,
    inner: QuadConfig,
) -> Result<Integral>
where
    F: Fn(f64, f64) -> f64,
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    let mut failure: Option<Error> = None;
    let outer_result = integrate(
        |u| {
            if failure.is_some() {
                return 0.0;
            }
            match integrate(|v| f(u, v), lo(u), hi(u), inner) {
                Ok(r) => r.value,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        a,
        b,
        outer,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    outer_result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, QuadConfig::default()).unwrap();
        // x^3 - x^2/2 + 2x from -1 to 2
        let exact = (8.0 - 2.0 + 4.0) - (-1.0 - 0.5 - 2.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn log_singularity_converges() {
        // int_0^1 log x dx = -1 (endpoint singularity, never evaluated at 0)
        let r = integrate(|x| x.ln(), 0.0, 1.0, QuadConfig::default()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let cfg = QuadConfig::default();
        let fwd = integrate(f64::exp, 0.0, 1.0, cfg).unwrap().value;
        let back = integrate(f64::exp, 1.0, 0.0, cfg).unwrap().value;
        assert_eq!(fwd, -back);
        assert!((fwd - (std::f64::consts::E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x| (50.0 * x).cos(), 0.0, 1.0, QuadConfig::default()).unwrap();
        assert!((r.value - 50f64.sin() / 50.0).abs() < 1e-11);
    }

    #[test]
    fn non_finite_integrand_fails() {
        let err = integrate(|x| 1.0 / x, -1.0, 1.0, QuadConfig::default());
        assert!(matches!(err, Err(Error::QuadratureFailure(_))));
    }

    #[test]
    fn tiny_budget_fails() {
        let cfg = QuadConfig::new(1e-14, 0.0, 2);
        let err = integrate(|x| x.sqrt(), 0.0, 1.0, cfg);
        assert!(matches!(err, Err(Error::QuadratureFailure(_))));
    }

    #[test]
    fn triangle_integral() {
        // int_0^1 int_0^u u v dv du = int_0^1 u^3/2 du = 1/8
        let cfg = QuadConfig::default();
        let r = integrate_iterated(|u, v| u * v, 0.0, 1.0, |_| 0.0, |u| u, cfg, cfg).unwrap();
        assert!((r.value - 0.125).abs() < 1e-13);
    }

    #[test]
    fn kinked_kernel_split_on_diagonal() {
        // int int_[0,1]^2 min(u,v) = 1/3
        let cfg = QuadConfig::default();
        let lower = integrate_iterated(|u, v| u.min(v), 0.0, 1.0, |_| 0.0, |u| u, cfg, cfg).unwrap();
        let upper = integrate_iterated(|u, v| u.min(v), 0.0, 1.0, |u| u, |_| 1.0, cfg, cfg).unwrap();
        assert!((lower.value + upper.value - 1.0 / 3.0).abs() < 1e-13);
    }
}
