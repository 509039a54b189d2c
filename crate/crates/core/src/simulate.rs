//! Seeded Monte Carlo comparison of tail exponent estimators.
//!
//! Every replication owns a ChaCha20 stream selected by
//! `(nu_index << 32) | rep` under the key derived from the master seed, so
//! results do not depend on the number of workers or on scheduling. Cell
//! aggregates are reduced in replication order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{dedh_moment, hill_left, pickands};
use crate::error::{Error, Result};
use crate::model::ParzenModel;
use crate::quantile::{BernsteinEstimate, SampleData};
use crate::regression::{fit_tail, Tail, WlsConfig};
use crate::weightexpr::WeightFn;

/// Tail exponents of the standard simulation grid, largest first.
pub const DEFAULT_NUS: [f64; 14] = [
    2.25, 2.0, 1.833, 1.667, 1.556, 1.5, 1.333, 1.25, 1.2, 1.182, 1.167, 1.1, 1.067, 1.05,
];

/// WLS and OLS with one to three harmonics plus the classical baselines.
pub const DEFAULT_ESTIMATORS: &str =
    "wls:1:u/300,wls:2:u/300,wls:3:u/300,ols:1,ols:2,ols:3,hill,pickands,dedh";

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorSpec {
    Wls { p_tilde: usize, weight: WeightFn },
    Ols { p_tilde: usize },
    Hill,
    Pickands,
    DEdH,
}

impl EstimatorSpec {
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Parses a comma-separated list such as `wls:2:u/300,ols:1,hill`.
    pub fn parse_list(text: &str) -> Result<Vec<EstimatorSpec>> {
        let specs = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        if specs.is_empty() {
            return Err(Error::Config("estimator list is empty".into()));
        }
        Ok(specs)
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorSpec::Wls { p_tilde, weight } => write!(f, "wls:{p_tilde}:{weight}"),
            EstimatorSpec::Ols { p_tilde } => write!(f, "ols:{p_tilde}"),
            EstimatorSpec::Hill => f.write_str("hill"),
            EstimatorSpec::Pickands => f.write_str("pickands"),
            EstimatorSpec::DEdH => f.write_str("dedh"),
        }
    }
}

impl FromStr for EstimatorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.splitn(3, ':').collect();
        let p_tilde = |p: &str| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad harmonic count '{p}' in estimator '{s}'")))
        };
        match parts.as_slice() {
            ["wls", p, w] => Ok(EstimatorSpec::Wls {
                p_tilde: p_tilde(p)?,
                weight: WeightFn::parse(w.trim())?,
            }),
            ["ols", p] => Ok(EstimatorSpec::Ols { p_tilde: p_tilde(p)? }),
            ["hill"] => Ok(EstimatorSpec::Hill),
            ["pickands"] => Ok(EstimatorSpec::Pickands),
            ["dedh"] => Ok(EstimatorSpec::DEdH),
            _ => Err(Error::Config(format!(
                "unknown estimator '{s}', expected wls:<p>:<weight>, ols:<p>, hill, pickands or dedh"
            ))),
        }
    }
}

/// How the simulated sample is located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleAnchor {
    /// Left branch is an exact power law, `Q(u) = u^{1-nu} / (1-nu)`.
    #[default]
    LeftPowerLaw,
    /// `Q(1/2) = 0`.
    Median,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub nu_list: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub estimators: Vec<EstimatorSpec>,
    /// Sample fraction of the classical estimators.
    pub k_n: usize,
    pub k_bernstein: usize,
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    pub anchor: SampleAnchor,
    /// Worker count; `None` or `Some(0)` uses the rayon default.
    pub threads: Option<usize>,
}

impl SimulationSpec {
    /// `n = k = 700`, `eps = a = 0.001`, `b = 0.4`, `k_n = 100`, 200 replications.
    pub fn standard(seed: u64) -> Self {
        Self {
            nu_list: DEFAULT_NUS.to_vec(),
            n: 700,
            reps: 200,
            seed,
            estimators: EstimatorSpec::parse_list(DEFAULT_ESTIMATORS).expect("static list parses"),
            k_n: 100,
            k_bernstein: 700,
            epsilon: 0.001,
            a: 0.001,
            b: 0.4,
            anchor: SampleAnchor::default(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.nu_list.is_empty() {
            return Err(Error::Config("nu list is empty".into()));
        }
        if let Some(nu) = self.nu_list.iter().find(|nu| !(nu.is_finite() && **nu > 0.0)) {
            return Err(Error::Config(format!("tail exponents must be positive, got {nu}")));
        }
        if self.n < 2 {
            return Err(Error::Config("sample size must be at least 2".into()));
        }
        if self.k_n == 0 || self.k_n >= self.n {
            return Err(Error::Config(format!("need 1 <= k_n < n, got k_n = {}", self.k_n)));
        }
        if self.k_bernstein == 0 {
            return Err(Error::Config("Bernstein k must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1/2), got {}", self.epsilon)));
        }
        if self.a < self.epsilon || self.b > 1.0 - self.epsilon {
            return Err(Error::Config("[a, b] must lie inside [epsilon, 1 - epsilon]".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimators configured".into()));
        }
        if self.nu_list.len() as u64 > u32::MAX as u64 || self.reps as u64 > u32::MAX as u64 {
            return Err(Error::Config("nu list and reps must each fit in 32 bits".into()));
        }
        self.configs().map(|_| ())
    }

    /// Regression configurations, one per estimator (`None` for classical ones).
    fn configs(&self) -> Result<Vec<Option<WlsConfig>>> {
        self.estimators
            .iter()
            .map(|e| match e {
                EstimatorSpec::Wls { p_tilde, weight } => {
                    WlsConfig::new(self.a, self.b, *p_tilde, weight.clone(), Tail::Left, self.n).map(Some)
                }
                EstimatorSpec::Ols { p_tilde } => {
                    WlsConfig::new(self.a, self.b, *p_tilde, WeightFn::unit(), Tail::Left, self.n).map(Some)
                }
                _ => Ok(None),
            })
            .collect()
    }

    fn model(&self, nu: f64) -> Result<ParzenModel> {
        let model = ParzenModel::power_law(nu)?;
        match self.anchor {
            SampleAnchor::LeftPowerLaw => model.anchored_to_left_power_law(),
            SampleAnchor::Median => Ok(model),
        }
    }
}

/// Generator for replication `rep` of the `nu_index`-th tail exponent.
pub fn replication_rng(seed: u64, nu_index: usize, rep: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((nu_index as u64) << 32) | rep as u64);
    rng
}

/// `U^{-alpha}` draws, sorted: an exact Pareto sample with tail index `alpha`.
pub fn pareto_fixture(alpha: f64, n: usize, seed: u64) -> Result<SampleData> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|_| {
            let u: f64 = rng.sample(rand::distributions::Open01);
            u.powf(-alpha)
        })
        .collect();
    SampleData::new(values)
}

/// Runs every configured estimator on one replication. Estimates are on the
/// Parzen scale; classical estimators are applied to the left tail.
pub fn replicate(spec: &SimulationSpec, nu_index: usize, rep: usize) -> Result<Vec<Result<f64>>> {
    let configs = spec.configs()?;
    let model = spec.model(spec.nu_list[nu_index])?;
    replicate_with(spec, &model, &configs, nu_index, rep)
}

fn replicate_with(
    spec: &SimulationSpec,
    model: &ParzenModel,
    configs: &[Option<WlsConfig>],
    nu_index: usize,
    rep: usize,
) -> Result<Vec<Result<f64>>> {
    let mut rng = replication_rng(spec.seed, nu_index, rep);
    let sample = model.sample_with_rng(spec.n, &mut rng)?;
    let bernstein = BernsteinEstimate::fit(&sample, spec.k_bernstein, spec.epsilon);
    let mut reflected = None;
    let estimates = spec
        .estimators
        .iter()
        .zip(configs)
        .map(|(est, cfg)| match est {
            EstimatorSpec::Wls { .. } | EstimatorSpec::Ols { .. } => {
                let cfg = cfg.as_ref().expect("regression estimators carry a config");
                let bern = bernstein.as_ref().map_err(Clone::clone)?;
                Ok(fit_tail(bern, cfg)?.nu_hat)
            }
            EstimatorSpec::Hill => Ok(hill_left(&sample, spec.k_n)?.nu_hat),
            EstimatorSpec::Pickands => {
                let neg = reflected.get_or_insert_with(|| sample.negated());
                Ok(pickands(neg, spec.k_n)?.nu_hat)
            }
            EstimatorSpec::DEdH => {
                let neg = reflected.get_or_insert_with(|| sample.negated());
                Ok(dedh_moment(neg, spec.k_n)?.nu_hat)
            }
        })
        .collect();
    Ok(estimates)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRow {
    pub nu_true: f64,
    pub estimator: String,
    pub mean: f64,
    pub mse: f64,
    pub failures: usize,
    pub reps_effective: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellSummary {
    pub mean: f64,
    pub mse: f64,
    pub variance: f64,
    pub failures: usize,
    pub reps_effective: usize,
}

/// Mean, MSE about `nu_true` and population variance of the successful
/// estimates, summed in the given order.
pub fn aggregate(nu_true: f64, estimates: &[Option<f64>]) -> CellSummary {
    let ok: Vec<f64> = estimates.iter().flatten().copied().collect();
    let failures = estimates.len() - ok.len();
    if ok.is_empty() {
        return CellSummary {
            mean: f64::NAN,
            mse: f64::NAN,
            variance: f64::NAN,
            failures,
            reps_effective: 0,
        };
    }
    let count = ok.len() as f64;
    let mean = ok.iter().sum::<f64>() / count;
    let mse = ok.iter().map(|v| (v - nu_true).powi(2)).sum::<f64>() / count;
    let variance = ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
    CellSummary {
        mean,
        mse,
        variance,
        failures,
        reps_effective: ok.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationMeta {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub k_n: usize,
    pub k_bernstein: usize,
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    pub estimators: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    /// Sorted by `nu_true` descending, then estimator declaration order.
    pub rows: Vec<SimulationRow>,
    pub meta: SimulationMeta,
}

impl SimulationReport {
    pub fn row(&self, nu_true: f64, estimator: &str) -> Option<&SimulationRow> {
        self.rows
            .iter()
            .find(|r| r.nu_true == nu_true && r.estimator == estimator)
    }
}

pub fn run_simulation(spec: &SimulationSpec) -> Result<SimulationReport> {
    spec.validate()?;
    let configs = spec.configs()?;
    let models = spec
        .nu_list
        .iter()
        .map(|&nu| spec.model(nu))
        .collect::<Result<Vec<_>>>()?;

    let items: Vec<(usize, usize)> = (0..spec.nu_list.len())
        .flat_map(|i| (0..spec.reps).map(move |r| (i, r)))
        .collect();
    let work = || -> Vec<Vec<Option<f64>>> {
        items
            .par_iter()
            .map(|&(i, r)| match replicate_with(spec, &models[i], &configs, i, r) {
                Ok(est) => est.into_iter().map(|e| e.ok().filter(|v| v.is_finite())).collect(),
                Err(_) => vec![None; spec.estimators.len()],
            })
            .collect()
    };
    let results = match spec.threads.filter(|&t| t > 0) {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut order: Vec<usize> = (0..spec.nu_list.len()).collect();
    order.sort_by(|&x, &y| spec.nu_list[y].total_cmp(&spec.nu_list[x]));

    let mut rows = Vec::with_capacity(order.len() * spec.estimators.len());
    for &i in &order {
        let nu = spec.nu_list[i];
        let block = &results[i * spec.reps..(i + 1) * spec.reps];
        for (e, est) in spec.estimators.iter().enumerate() {
            let column: Vec<Option<f64>> = block.iter().map(|rep| rep[e]).collect();
            let cell = aggregate(nu, &column);
            rows.push(SimulationRow {
                nu_true: nu,
                estimator: est.label(),
                mean: cell.mean,
                mse: cell.mse,
                failures: cell.failures,
                reps_effective: cell.reps_effective,
            });
        }
    }

    Ok(SimulationReport {
        rows,
        meta: SimulationMeta {
            n: spec.n,
            reps: spec.reps,
            seed: spec.seed,
            k_n: spec.k_n,
            k_bernstein: spec.k_bernstein,
            epsilon: spec.epsilon,
            a: spec.a,
            b: spec.b,
            estimators: spec.estimators.iter().map(EstimatorSpec::label).collect(),
        },
    })
}
