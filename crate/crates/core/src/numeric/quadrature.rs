//! Globally adaptive 15-point Gauss-Kronrod quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae (non-negative half) and weights; the 7-point Gauss rule
// uses the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-15,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let sum = f(center - dx) + f(center + dx);
        kronrod += w * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]`, bisecting the subinterval with the largest
/// error estimate until the total error is below
/// `max(rel_tol * |I|, abs_tol)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::invalid(format!("bad integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    loop {
        if !value.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                achieved: f64::INFINITY,
                requested: opts.rel_tol,
                intervals: heap.len(),
            });
        }
        if error <= (opts.rel_tol * value.abs()).max(opts.abs_tol) {
            return Ok(Quadrature {
                value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureNonConvergence {
                achieved: error / value.abs().max(f64::MIN_POSITIVE),
                requested: opts.rel_tol,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // refresh the running sums periodically to stop drift
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
}
