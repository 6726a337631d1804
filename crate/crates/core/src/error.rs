use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "quadrature did not converge: achieved relative error {achieved:.3e} \
         (requested {requested:.1e}) after {intervals} subintervals"
    )]
    QuadratureNonConvergence {
        achieved: f64,
        requested: f64,
        intervals: usize,
    },

    #[error("resistor average undefined for non-positive divergences ({d12}, {d21})")]
    UndefinedDistance { d12: f64, d21: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate confusion matrix: chance agreement is 1 but observed agreement is {observed}")]
    DegenerateMatrix { observed: f64 },

    #[error("infeasible imbalance: target f1 = {target} needs {needed} rows in class {class}")]
    InfeasibleImbalance { target: f64, class: u8, needed: i64 },

    #[error("logistic regression did not converge after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NonConvergence { iterations: usize, gradient_norm: f64 },

    #[error("insufficient sweep: {line} line has {usable} usable points, need at least 3")]
    InsufficientSweep { line: &'static str, usable: usize },

    #[error("load error at line {line}: {message}")]
    Load { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
