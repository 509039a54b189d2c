//! Tail exponent estimation for heavy-tailed distributions in the
//! density-quantile domain.
//!
//! The log density-quantile function `log fQ(u)` of a distribution with a
//! regularly varying left tail is modelled near zero as
//!
//! ```text
//! log fQ(u) = nu0 * log u + theta_0 + 2 * sum_k theta_k * cos(2 pi k u)
//! ```
//!
//! and the tail exponent `nu0` is read off a weighted least squares fit of
//! a smoothed estimate of `log fQ` on that basis. The crate provides:
//!
//! - [`model`]: the density-quantile model itself (true `fQ`, `q'/q`, `Q`, sampling)
//! - [`quantile`]: empirical quantiles and the Bernstein quantile-density estimator
//! - [`weightexpr`]: a small expression language for weight functions `R(u)`
//! - [`regression`]: design construction and the weighted least squares fit
//! - [`classical`]: Hill, Pickands and moment (DEdH) baselines
//! - [`asymvar`]: the limit Gram matrix, influence function and asymptotic variance
//! - [`simulate`]: a seeded, parallel Monte Carlo harness
//! - [`report`]: stable CSV/JSON record formats shared by the CLI and bindings

pub mod asymvar;
pub mod classical;
mod error;
pub mod model;
pub mod quadrature;
pub mod quantile;
pub mod regression;
pub mod report;
pub mod simulate;
pub mod weightexpr;

pub use asymvar::{asymptotic_variance, g_r, limit_matrix, InfluenceFunction, VarianceReport};
pub use classical::{dedh_moment, hill_left, hill_right, pickands, ClassicalEstimate, ClassicalKind};
pub use error::{Error, Result};
pub use model::ParzenModel;
pub use quantile::{BernsteinEstimate, SampleData};
pub use regression::{build_design, estimate_tail, wls_solve, Design, Tail, TailFit, WlsConfig};
pub use simulate::{run_simulation, EstimatorSpec, SimulationReport, SimulationSpec};
pub use weightexpr::{parse_weight, WeightFn};
