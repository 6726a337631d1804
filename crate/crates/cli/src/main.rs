//! `kappabound` command-line tool: generate reference data, estimate class
//! divergences, audit a classifier against the kappa limit, sweep the class
//! balance and fit the leakage-rate model.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "kappabound",
    version,
    about = "Information-theoretic limits to two-class classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a dataset from a reference model.
    Gen(GenArgs),
    /// Estimate CDI(1,2), CDI(2,1) and CDR of a dataset.
    Estimate(EstimateArgs),
    /// Cross-validate a classifier and compare its kappa with the limit.
    Analyze(AnalyzeArgs),
    /// Classify and estimate across a grid of class-1 fractions.
    Sweep(SweepArgs),
    /// Fit the leakage-rate lines to a sweep and predict kappa against f1.
    Fit(FitArgs),
    /// Greedy forward selection of variables by CDR.
    Select(SelectArgs),
    /// Renyi/Chernoff divergence profile of a reference model.
    Curve(CurveArgs),
    /// Rates and kappa of a given confusion matrix.
    Rates(RatesArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gaussian,
    Exponential,
}

#[derive(Args, Debug, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub model: ModelKind,
    /// Number of independent, identically specified variables.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mean1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sd1: f64,
    #[arg(long, default_value_t = 1.02, allow_negative_numbers = true)]
    pub mean2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sd2: f64,
    /// Class-1 exponential scale (mean).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Class-2 exponential scale (mean).
    #[arg(long, default_value_t = 2.392)]
    pub beta: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct OutputArgs {
    /// Write the JSON report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the text summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct DataArgs {
    /// Delimited text table with a header row.
    pub dataset: PathBuf,
    /// TOML schema (class column, labels, ignored columns, kinds).
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Class column name [default: class].
    #[arg(long)]
    pub class_column: Option<String>,
    /// Label of class 1 [default: 1].
    #[arg(long)]
    pub class1_label: Option<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
}

#[derive(Args, Debug, Serialize)]
pub struct EstimatorArgs {
    /// Bins per continuous variable [default: ceil(sqrt(N)), at most 256].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Jitter replicates.
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Neighbour order.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifierArgs {
    /// auto, gaussian_naive_bayes (gnb), categorical_naive_bayes (cnb) or
    /// logistic_regression (logistic).
    #[arg(long, default_value = "auto")]
    pub classifier: String,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// L2 penalty of logistic regression.
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    /// Laplace smoothing of categorical naive Bayes.
    #[arg(long, default_value_t = 1.0)]
    pub smoothing: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 8192)]
    pub n1: usize,
    #[arg(long, default_value_t = 8192)]
    pub n2: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dataset file to write; the manifest goes next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Print the manifest as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Largest |kappa_limit - kappa| still called at-limit.
    #[arg(long, default_value_t = 0.08)]
    pub tolerance: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Class-1 fractions: a list `0.2,0.5,0.8` or a range `start:stop:step`
    /// [default: 0.05:0.95:0.05]. The native fraction is always added.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the per-point table here.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct FitArgs {
    /// Dataset to sweep (omit with --from-sweep).
    pub dataset: Option<PathBuf>,
    /// Fit a table previously written by `sweep --table`.
    #[arg(long, conflicts_with = "dataset")]
    pub from_sweep: Option<PathBuf>,
    /// TOML schema (class column, labels, ignored columns, kinds).
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Class column name [default: class].
    #[arg(long)]
    pub class_column: Option<String>,
    /// Label of class 1 [default: 1].
    #[arg(long)]
    pub class1_label: Option<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Class-1 fractions of the sweep, as for `sweep --grid`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Lower and upper f1 of the fitted region.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.15, 0.85])]
    pub window: Vec<f64>,
    /// Add `CDI12,CDI21` as pseudo-points at f1 = 0 and f1 = 1.
    #[arg(long)]
    pub anchors: Option<String>,
    /// Use the native-fraction divergence estimate of the sweep as anchors.
    #[arg(long, conflicts_with_all = ["anchors", "from_sweep"])]
    pub anchor_native: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the sweep table here.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Write the predicted kappa curve (f1 = 0, 0.01, …, 1) here.
    #[arg(long)]
    pub kappa_table: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long)]
    pub max_vars: Option<usize>,
    /// Smallest CDR gain (bits) that admits another variable.
    #[arg(long, default_value_t = 0.02)]
    pub epsilon: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Points on the t grid.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Write the `t, renyi_pq, renyi_qp, chernoff` table here.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct RatesArgs {
    /// `n1_true,n1_leak,n2_leak,n2_true` (rows are true classes).
    #[arg(long)]
    pub matrix: String,
    /// Estimated CDR in bits; adds the kappa-limit verdict.
    #[arg(long)]
    pub cdr: Option<f64>,
    #[arg(long, default_value_t = 0.08)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Fit(a) => commands::fit(a),
        Command::Select(a) => commands::select(a),
        Command::Curve(a) => commands::curve(a),
        Command::Rates(a) => commands::rates(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
