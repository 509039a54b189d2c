//! Python bindings for `tailfit`.
//!
//! Samples cross the boundary as lists of floats. Errors raise
//! `tailfit_py.TailfitError` with the error name as message prefix.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use tailfit::simulate::{SampleAnchor, DEFAULT_ESTIMATORS};
use tailfit::{Error, EstimatorSpec, SampleData, SimulationSpec, Tail, WeightFn, WlsConfig};

create_exception!(tailfit_py, TailfitError, PyException);

fn py_err(e: Error) -> PyErr {
    TailfitError::new_err(format!("{}: {e}", e.name()))
}

fn sample_data(values: Vec<f64>) -> PyResult<SampleData> {
    SampleData::new(values).map_err(py_err)
}

fn tail(name: &str) -> PyResult<Tail> {
    name.parse().map_err(py_err)
}

#[pyclass(name = "ParzenModel", module = "tailfit_py", frozen)]
struct PyParzenModel {
    inner: tailfit::ParzenModel,
}

#[pymethods]
impl PyParzenModel {
    /// Left tail exponent `nu0` with cosine coefficients `theta_left`; the right
    /// branch mirrors the left one unless given.
    #[new]
    #[pyo3(signature = (nu0, theta_left = Vec::new(), nu1 = None, theta_right = None, location = 0.0))]
    fn new(
        nu0: f64,
        theta_left: Vec<f64>,
        nu1: Option<f64>,
        theta_right: Option<Vec<f64>>,
        location: f64,
    ) -> PyResult<Self> {
        let right = theta_right.unwrap_or_else(|| theta_left.clone());
        let inner = tailfit::ParzenModel::new(nu0, nu1.unwrap_or(nu0), theta_left, right).map_err(py_err)?;
        Ok(Self {
            inner: inner.with_location(location),
        })
    }

    /// Copy located so that the left branch is an exact power law.
    fn anchored(&self) -> PyResult<Self> {
        let inner = self.inner.clone().anchored_to_left_power_law().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn nu0(&self) -> f64 {
        self.inner.nu0()
    }

    #[getter]
    fn nu1(&self) -> f64 {
        self.inner.nu1()
    }

    #[getter]
    fn location(&self) -> f64 {
        self.inner.location()
    }

    fn fq(&self, u: f64) -> PyResult<f64> {
        self.inner.fq(u).map_err(py_err)
    }

    fn q(&self, u: f64) -> PyResult<f64> {
        self.inner.q(u).map_err(py_err)
    }

    fn log_q_derivative(&self, u: f64) -> PyResult<f64> {
        self.inner.log_q_derivative(u).map_err(py_err)
    }

    fn quantile(&self, u: f64) -> PyResult<f64> {
        self.inner.quantile(u).map_err(py_err)
    }

    /// `n` sorted draws from the generator seeded by `seed`.
    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        Ok(self.inner.sample(n, seed).map_err(py_err)?.values().to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "ParzenModel(nu0={}, theta_left={:?}, nu1={}, theta_right={:?}, location={})",
            self.inner.nu0(),
            self.inner.theta_left(),
            self.inner.nu1(),
            self.inner.theta_right(),
            self.inner.location()
        )
    }
}

#[pyclass(name = "TailFit", module = "tailfit_py", get_all, frozen)]
struct PyTailFit {
    nu_hat: f64,
    theta_hat: Vec<f64>,
    grid: Vec<f64>,
    responses: Vec<f64>,
    fitted: Vec<f64>,
    condition_number: f64,
    weight_sum: f64,
}

#[pymethods]
impl PyTailFit {
    fn residuals(&self) -> Vec<f64> {
        self.responses.iter().zip(&self.fitted).map(|(y, f)| y - f).collect()
    }

    fn __repr__(&self) -> String {
        format!("TailFit(nu_hat={}, theta_hat={:?})", self.nu_hat, self.theta_hat)
    }
}

/// Weighted least squares tail exponent of a sample.
#[pyfunction]
#[pyo3(signature = (sample, a = 0.001, b = 0.4, p_tilde = 1, weight = "1", tail = "left", k = None, epsilon = 0.001))]
#[allow(clippy::too_many_arguments)]
fn estimate_tail(
    sample: Vec<f64>,
    a: f64,
    b: f64,
    p_tilde: usize,
    weight: &str,
    tail: &str,
    k: Option<usize>,
    epsilon: f64,
) -> PyResult<PyTailFit> {
    let sample = sample_data(sample)?;
    let weight = WeightFn::parse(weight).map_err(|e| py_err(e.into()))?;
    let cfg = WlsConfig::new(a, b, p_tilde, weight, self::tail(tail)?, sample.n()).map_err(py_err)?;
    let fit = tailfit::estimate_tail(&sample, &cfg, k.unwrap_or(sample.n()), epsilon).map_err(py_err)?;
    Ok(PyTailFit {
        nu_hat: fit.nu_hat,
        theta_hat: fit.theta_hat,
        grid: fit.grid,
        responses: fit.responses,
        fitted: fit.fitted,
        condition_number: fit.condition_number,
        weight_sum: fit.weight_sum,
    })
}

/// Hill tail index `alpha` of the given tail.
#[pyfunction]
#[pyo3(signature = (sample, k_n, tail = "right"))]
fn hill(sample: Vec<f64>, k_n: usize, tail: &str) -> PyResult<f64> {
    let sample = sample_data(sample)?;
    let est = match self::tail(tail)? {
        Tail::Left => tailfit::hill_left(&sample, k_n),
        Tail::Right => tailfit::hill_right(&sample, k_n),
    };
    Ok(est.map_err(py_err)?.alpha_hat)
}

/// Pickands extreme-value index of the upper tail.
#[pyfunction]
fn pickands(sample: Vec<f64>, k_n: usize) -> PyResult<f64> {
    Ok(tailfit::pickands(&sample_data(sample)?, k_n).map_err(py_err)?.alpha_hat)
}

/// Moment (DEdH) extreme-value index of the upper tail.
#[pyfunction]
fn dedh(sample: Vec<f64>, k_n: usize) -> PyResult<f64> {
    Ok(tailfit::dedh_moment(&sample_data(sample)?, k_n).map_err(py_err)?.alpha_hat)
}

#[pyclass(name = "VarianceReport", module = "tailfit_py", get_all, frozen)]
struct PyVarianceReport {
    variance: f64,
    cond_m: f64,
    quad_tol: f64,
    m: Vec<Vec<f64>>,
    v_row: Vec<f64>,
}

#[pymethods]
impl PyVarianceReport {
    fn __repr__(&self) -> String {
        format!("VarianceReport(variance={}, cond_m={})", self.variance, self.cond_m)
    }
}

/// Asymptotic variance of the left-tail estimator under `model`.
#[pyfunction]
#[pyo3(signature = (model, a, b, weight = "1", p_tilde = 1))]
fn asymptotic_variance(model: &PyParzenModel, a: f64, b: f64, weight: &str, p_tilde: usize) -> PyResult<PyVarianceReport> {
    let weight = WeightFn::parse(weight).map_err(|e| py_err(e.into()))?;
    let rep = tailfit::asymptotic_variance(&model.inner, a, b, &weight, p_tilde).map_err(py_err)?;
    Ok(PyVarianceReport {
        variance: rep.variance,
        cond_m: rep.cond_m,
        quad_tol: rep.quad_tol,
        m: rep.m,
        v_row: rep.v_row,
    })
}

type SimulationRow = (f64, String, f64, f64, usize, usize);

/// Monte Carlo table as a list of `(nu_true, estimator, mean, mse, failures, reps_effective)`.
#[pyfunction]
#[pyo3(signature = (nu_list, n = 700, reps = 200, seed = 1, estimators = DEFAULT_ESTIMATORS, k_n = 100, k = None, epsilon = 0.001, a = 0.001, b = 0.4, threads = None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    nu_list: Vec<f64>,
    n: usize,
    reps: usize,
    seed: u64,
    estimators: &str,
    k_n: usize,
    k: Option<usize>,
    epsilon: f64,
    a: f64,
    b: f64,
    threads: Option<usize>,
) -> PyResult<Vec<SimulationRow>> {
    let spec = SimulationSpec {
        nu_list,
        n,
        reps,
        seed,
        estimators: EstimatorSpec::parse_list(estimators).map_err(py_err)?,
        k_n,
        k_bernstein: k.unwrap_or(n),
        epsilon,
        a,
        b,
        anchor: SampleAnchor::LeftPowerLaw,
        threads,
    };
    let report = tailfit::run_simulation(&spec).map_err(py_err)?;
    Ok(report
        .rows
        .into_iter()
        .map(|r| (r.nu_true, r.estimator, r.mean, r.mse, r.failures, r.reps_effective))
        .collect())
}

/// Canonical, fully parenthesised form of a weight expression.
#[pyfunction]
fn parse_weight(expr: &str) -> PyResult<String> {
    Ok(WeightFn::parse(expr).map_err(|e| py_err(e.into()))?.ast().to_string())
}

#[pyfunction]
fn eval_weight(expr: &str, u: f64) -> PyResult<f64> {
    WeightFn::parse(expr)
        .map_err(|e| py_err(e.into()))?
        .eval(u)
        .map_err(py_err)
}

#[pymodule]
fn tailfit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TailfitError", m.py().get_type::<TailfitError>())?;
    m.add_class::<PyParzenModel>()?;
    m.add_class::<PyTailFit>()?;
    m.add_class::<PyVarianceReport>()?;
    m.add_function(wrap_pyfunction!(estimate_tail, m)?)?;
    m.add_function(wrap_pyfunction!(hill, m)?)?;
    m.add_function(wrap_pyfunction!(pickands, m)?)?;
    m.add_function(wrap_pyfunction!(dedh, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_variance, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(parse_weight, m)?)?;
    m.add_function(wrap_pyfunction!(eval_weight, m)?)?;
    Ok(())
}
