//! `tailfit` command-line frontend.
//!
//! Exit codes: 0 success, 2 configuration or I/O error, 3 estimation
//! failure, 4 numerical failure in the variance computation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tailfit::asymvar::variance_table;
use tailfit::report::{
    estimates_to_string, simulation_to_string, variance_table_to_string, variance_to_string, EstimateRecord, Format,
};
use tailfit::simulate::{SampleAnchor, DEFAULT_ESTIMATORS, DEFAULT_NUS};
use tailfit::{
    asymptotic_variance, dedh_moment, estimate_tail, hill_left, hill_right, pickands, run_simulation, Error,
    EstimatorSpec, ParzenModel, SampleData, SimulationSpec, Tail, WeightFn, WlsConfig,
};

#[derive(Parser)]
#[command(name = "tailfit", version, about = "Tail exponent estimation in the density-quantile domain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the tail exponent of a sample file (one number per line).
    Estimate(EstimateArgs),
    /// Monte Carlo comparison of estimators on simulated power-law samples.
    Simulate(SimulateArgs),
    /// Asymptotic variance of the weighted estimator.
    Variance(VarianceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TailArg {
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnchorArg {
    /// Left branch is an exact power law.
    Power,
    /// Quantile function vanishes at the median.
    Median,
}

#[derive(Args)]
struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Sample file: one number per line, '#' comments and blank lines ignored.
    #[arg(long)]
    input: PathBuf,
    /// Lower end of the percentile range.
    #[arg(long, default_value_t = 0.001)]
    a: f64,
    /// Upper end of the percentile range.
    #[arg(long, default_value_t = 0.4)]
    b: f64,
    /// Number of cosine harmonics in the regression.
    #[arg(long, default_value_t = 1)]
    ptilde: usize,
    /// Weight function R(u), e.g. "u/300" or "1+cos(u)".
    #[arg(long, default_value = "1")]
    weight: String,
    #[arg(long, value_enum, default_value = "left")]
    tail: TailArg,
    /// Bernstein degree (default: sample size).
    #[arg(long)]
    k: Option<usize>,
    /// Trimming of the Bernstein estimator.
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    /// Also report Hill, Pickands and DEdH estimates.
    #[arg(long)]
    classical: bool,
    /// Sample fraction of the classical estimators.
    #[arg(long, default_value_t = 100)]
    kn: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SimulateArgs {
    /// True tail exponents, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_NUS.to_vec())]
    nu: Vec<f64>,
    /// Sample size.
    #[arg(long, default_value_t = 700)]
    n: usize,
    /// Replications per tail exponent.
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sample fraction of the classical estimators.
    #[arg(long, default_value_t = 100)]
    kn: usize,
    /// Bernstein degree (default: n).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.001)]
    a: f64,
    #[arg(long, default_value_t = 0.4)]
    b: f64,
    /// Comma list of wls:<p>:<weight>, ols:<p>, hill, pickands, dedh.
    #[arg(long, default_value = DEFAULT_ESTIMATORS)]
    estimators: String,
    /// Location of the simulated samples.
    #[arg(long, value_enum, default_value = "power")]
    anchor: AnchorArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VarianceArgs {
    /// Left tail exponent of the model.
    #[arg(long, required_unless_present = "table1")]
    nu0: Option<f64>,
    /// Cosine coefficients of the slowly varying part, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,1", allow_hyphen_values = true)]
    theta: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    a: f64,
    #[arg(long, default_value_t = 0.4)]
    b: f64,
    /// Weight function R(u).
    #[arg(long, default_value = "1")]
    weight: String,
    #[arg(long, default_value_t = 1)]
    ptilde: usize,
    /// Compute the full grid of tail exponents, intervals and weights.
    #[arg(long)]
    table1: bool,
    #[command(flatten)]
    output: Output,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn from_error(code: u8, e: &Error) -> Self {
        Self {
            code,
            message: format!("{}: {e}", e.name()),
        }
    }
}

/// Configuration-type errors exit 2; anything else exits with `code`.
fn classify(code: u8) -> impl Fn(Error) -> Failure {
    move |e| match e {
        Error::Config(_) | Error::Parse(_) => Failure::from_error(2, &e),
        _ => Failure::from_error(code, &e),
    }
}

fn read_sample(path: &Path) -> Result<SampleData, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Failure::config(format!("{}:{}: not a number: '{line}'", path.display(), i + 1)))?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Failure::config(format!("{}: no sample values", path.display())));
    }
    SampleData::new(values).map_err(|e| Failure::from_error(2, &e))
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_weight(src: &str) -> Result<WeightFn, Failure> {
    WeightFn::parse(src).map_err(|e| Failure::from_error(2, &e.into()))
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Failure> {
    let weight = parse_weight(&args.weight)?;
    let sample = read_sample(&args.input)?;
    let tail = match args.tail {
        TailArg::Left => Tail::Left,
        TailArg::Right => Tail::Right,
    };
    let cfg = WlsConfig::new(args.a, args.b, args.ptilde, weight, tail, sample.n()).map_err(classify(2))?;
    let k = args.k.unwrap_or(sample.n());
    if k == 0 {
        return Err(Failure::config("--k must be at least 1"));
    }
    if !(args.epsilon > 0.0 && args.epsilon < 0.5) || args.a < args.epsilon || args.b > 1.0 - args.epsilon {
        return Err(Failure::config(format!(
            "ConfigError: need 0 < epsilon <= a < b <= 1 - epsilon, got epsilon = {}",
            args.epsilon
        )));
    }
    let fit = estimate_tail(&sample, &cfg, k, args.epsilon).map_err(classify(3))?;
    let mut records = vec![EstimateRecord::from_fit(&format!("wls:{}:{}", args.ptilde, args.weight), &fit)];
    if args.classical {
        let (hill, reflected) = match tail {
            Tail::Left => (hill_left(&sample, args.kn), sample.negated()),
            Tail::Right => (hill_right(&sample, args.kn), sample.clone()),
        };
        for est in [hill, pickands(&reflected, args.kn), dedh_moment(&reflected, args.kn)] {
            records.push(EstimateRecord::from_classical(&est.map_err(classify(3))?));
        }
    }
    let text = estimates_to_string(&records, args.output.format.into()).map_err(classify(2))?;
    emit(&text, &args.output.out)
}

fn worker_threads() -> Result<Option<usize>, Failure> {
    match std::env::var("TAILFIT_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::config(format!("TAILFIT_THREADS must be a nonnegative integer, got '{v}'"))),
        _ => Ok(None),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let estimators = EstimatorSpec::parse_list(&args.estimators).map_err(classify(2))?;
    let spec = SimulationSpec {
        nu_list: args.nu,
        n: args.n,
        reps: args.reps,
        seed: args.seed,
        estimators,
        k_n: args.kn,
        k_bernstein: args.k.unwrap_or(args.n),
        epsilon: args.epsilon,
        a: args.a,
        b: args.b,
        anchor: match args.anchor {
            AnchorArg::Power => SampleAnchor::LeftPowerLaw,
            AnchorArg::Median => SampleAnchor::Median,
        },
        threads: worker_threads()?,
    };
    spec.validate().map_err(|e| Failure::from_error(2, &e))?;
    let report = run_simulation(&spec).map_err(classify(3))?;
    let text = simulation_to_string(&report, args.output.format.into()).map_err(classify(2))?;
    emit(&text, &args.output.out)
}

fn cmd_variance(args: VarianceArgs) -> Result<(), Failure> {
    let format = args.output.format.into();
    if args.table1 {
        let cells = variance_table().map_err(classify(4))?;
        let text = variance_table_to_string(&cells, format).map_err(classify(2))?;
        return emit(&text, &args.output.out);
    }
    let weight = parse_weight(&args.weight)?;
    let nu0 = args.nu0.expect("clap enforces --nu0 without --table1");
    let model = ParzenModel::left_only(nu0, args.theta).map_err(|e| Failure::from_error(2, &e))?;
    if !(args.a > 0.0 && args.a < args.b && args.b <= 0.5) {
        return Err(Failure::config(format!(
            "ConfigError: need 0 < a < b <= 1/2, got a = {}, b = {}",
            args.a, args.b
        )));
    }
    let report = asymptotic_variance(&model, args.a, args.b, &weight, args.ptilde).map_err(classify(4))?;
    let text = variance_to_string(&report, format).map_err(classify(2))?;
    emit(&text, &args.output.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Variance(a) => cmd_variance(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tailfit: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}
