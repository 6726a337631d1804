//! Small numerical kernels: adaptive quadrature, golden-section search,
//! box-constrained straight-line least squares and replicate statistics.

pub mod golden;
pub mod linefit;
pub mod quadrature;

/// Sample mean; NaN for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean using the unbiased sample variance.
/// Undefined (NaN) for fewer than two samples.
pub fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}
