//! CSV and JSON renderings of estimates, simulation tables and variances.

use serde::Serialize;

use crate::asymvar::{VarianceCell, VarianceReport};
use crate::classical::ClassicalEstimate;
use crate::error::{Error, Result};
use crate::regression::TailFit;
use crate::simulate::SimulationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format '{s}', expected csv or json"))),
        }
    }
}

/// `x` with `digits` significant digits, fixed or scientific like C's `%g`,
/// trailing zeros removed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_string<F>(header: &[&str], fill: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let io = |e: csv::Error| Error::Config(format!("csv output failed: {e}"));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    fill(&mut w).map_err(io)?;
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Config(format!("json output failed: {e}")))
}

/// Flat record for one tail estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub estimator: String,
    pub nu_hat: f64,
    pub alpha_hat: f64,
    pub theta_hat: Vec<f64>,
    pub condition_number: Option<f64>,
}

impl EstimateRecord {
    pub fn from_fit(label: &str, fit: &TailFit) -> Self {
        Self {
            estimator: label.to_string(),
            nu_hat: fit.nu_hat,
            alpha_hat: fit.nu_hat - 1.0,
            theta_hat: fit.theta_hat.clone(),
            condition_number: Some(fit.condition_number),
        }
    }

    pub fn from_classical(est: &ClassicalEstimate) -> Self {
        Self {
            estimator: est.estimator.to_string(),
            nu_hat: est.nu_hat,
            alpha_hat: est.alpha_hat,
            theta_hat: Vec::new(),
            condition_number: None,
        }
    }
}

pub fn estimates_to_string(records: &[EstimateRecord], format: Format) -> Result<String> {
    match format {
        Format::Json => json_string(records),
        Format::Csv => csv_string(
            &["estimator", "nu_hat", "alpha_hat", "theta_hat", "condition_number"],
            |w| {
                for r in records {
                    let theta: Vec<String> = r.theta_hat.iter().map(|t| format_sig(*t, 10)).collect();
                    w.write_record([
                        r.estimator.clone(),
                        format_sig(r.nu_hat, 10),
                        format_sig(r.alpha_hat, 10),
                        theta.join(";"),
                        r.condition_number.map(|c| format_sig(c, 6)).unwrap_or_default(),
                    ])?;
                }
                Ok(())
            },
        ),
    }
}

pub fn simulation_to_string(report: &SimulationReport, format: Format) -> Result<String> {
    match format {
        Format::Json => json_string(report),
        Format::Csv => csv_string(
            &["nu_true", "estimator", "mean", "mse", "failures", "reps_effective"],
            |w| {
                for r in &report.rows {
                    w.write_record([
                        r.nu_true.to_string(),
                        r.estimator.clone(),
                        format!("{:.4}", r.mean),
                        format!("{:.4}", r.mse),
                        r.failures.to_string(),
                        r.reps_effective.to_string(),
                    ])?;
                }
                Ok(())
            },
        ),
    }
}

pub fn variance_to_string(report: &VarianceReport, format: Format) -> Result<String> {
    match format {
        Format::Json => json_string(report),
        Format::Csv => csv_string(&["V", "cond_M", "quad_tol"], |w| {
            w.write_record([
                format_sig(report.variance, 6),
                format_sig(report.cond_m, 6),
                format_sig(report.quad_tol, 6),
            ])
        }),
    }
}

pub fn variance_table_to_string(cells: &[VarianceCell], format: Format) -> Result<String> {
    match format {
        Format::Json => json_string(cells),
        Format::Csv => csv_string(&["nu0", "a", "b", "weight", "V", "cond_M"], |w| {
            for c in cells {
                w.write_record([
                    c.nu0.to_string(),
                    c.a.to_string(),
                    c.b.to_string(),
                    c.weight.clone(),
                    format_sig(c.variance, 6),
                    format_sig(c.cond_m, 6),
                ])?;
            }
            Ok(())
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{SimulationMeta, SimulationRow};

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(3.95093, 6), "3.95093");
        assert_eq!(format_sig(271_828.18, 6), "271828");
        assert_eq!(format_sig(1_234_567.0, 6), "1.23457e+06");
        assert_eq!(format_sig(0.000_123_456_7, 6), "0.000123457");
        assert_eq!(format_sig(1.5e-8, 6), "1.5e-08");
        assert_eq!(format_sig(-2.5, 6), "-2.5");
        assert_eq!(format_sig(100.0, 6), "100");
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(f64::NAN, 6), "NaN");
    }

    #[test]
    fn simulation_csv_quotes_weights() {
        let report = SimulationReport {
            rows: vec![SimulationRow {
                nu_true: 2.0,
                estimator: "wls:1:exp(-u),x".into(),
                mean: 2.01234,
                mse: 0.00049,
                failures: 1,
                reps_effective: 9,
            }],
            meta: SimulationMeta {
                n: 10,
                reps: 10,
                seed: 1,
                k_n: 2,
                k_bernstein: 10,
                epsilon: 0.01,
                a: 0.01,
                b: 0.4,
                estimators: vec![],
            },
        };
        let csv = simulation_to_string(&report, Format::Csv).unwrap();
        assert_eq!(
            csv,
            "nu_true,estimator,mean,mse,failures,reps_effective\r\n2,\"wls:1:exp(-u),x\",2.0123,0.0005,1,9\r\n"
        );
        let json: serde_json::Value = serde_json::from_str(&simulation_to_string(&report, Format::Json).unwrap()).unwrap();
        assert_eq!(json["rows"][0]["failures"], 1);
    }

    #[test]
    fn estimate_csv_joins_theta() {
        let rec = EstimateRecord {
            estimator: "wls".into(),
            nu_hat: 1.5,
            alpha_hat: 0.5,
            theta_hat: vec![0.25, -1.0],
            condition_number: Some(12.0),
        };
        let csv = estimates_to_string(&[rec], Format::Csv).unwrap();
        assert!(csv.ends_with("wls,1.5,0.5,0.25;-1,12\r\n"), "{csv}");
        assert!("xml".parse::<Format>().is_err());
    }
}
