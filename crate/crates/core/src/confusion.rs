//! Two-class confusion-matrix algebra: Cohen's kappa, the average error rate
//! `K = -log2(1 - kappa)`, the leakage rates `K12`/`K21` read off the
//! off-diagonal cells, the weighted rate `K_W` and the cap `K_max`.
//!
//! Rows are true classes; `n1_leak` counts class-1 entries assigned to
//! class 2 and `n2_leak` class-2 entries assigned to class 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub n1_true: u64,
    pub n1_leak: u64,
    pub n2_leak: u64,
    pub n2_true: u64,
}

impl ConfusionCounts {
    pub fn new(n1_true: u64, n1_leak: u64, n2_leak: u64, n2_true: u64) -> Result<Self> {
        let c = Self {
            n1_true,
            n1_leak,
            n2_leak,
            n2_true,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1() == 0 || self.n2() == 0 {
            return Err(Error::invalid(format!(
                "both classes need at least one entry (N1 = {}, N2 = {})",
                self.n1(),
                self.n2()
            )));
        }
        Ok(())
    }

    pub fn n1(&self) -> u64 {
        self.n1_true + self.n1_leak
    }

    pub fn n2(&self) -> u64 {
        self.n2_true + self.n2_leak
    }

    pub fn total(&self) -> u64 {
        self.n1() + self.n2()
    }

    pub fn f1(&self) -> f64 {
        self.n1() as f64 / self.total() as f64
    }

    /// The same matrix with the class labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            n1_true: self.n2_true,
            n1_leak: self.n2_leak,
            n2_leak: self.n1_leak,
            n2_true: self.n1_true,
        }
    }

    /// Accumulates another matrix (e.g. one cross-validation fold).
    pub fn add(&mut self, other: &ConfusionCounts) {
        self.n1_true += other.n1_true;
        self.n1_leak += other.n1_leak;
        self.n2_leak += other.n2_leak;
        self.n2_true += other.n2_true;
    }
}

impl fmt::Display for ConfusionCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.n1_true, self.n1_leak, self.n2_leak, self.n2_true
        )
    }
}

/// Parses the text form `n1_true,n1_leak,n2_leak,n2_true`.
impl FromStr for ConfusionCounts {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::invalid(format!(
                "confusion matrix needs 4 comma-separated counts, got {s:?}"
            )));
        }
        let mut v = [0u64; 4];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| Error::invalid(format!("not a non-negative integer: {p:?}")))?;
        }
        Self::new(v[0], v[1], v[2], v[3])
    }
}

/// Rates extracted from one confusion matrix. All rates in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub kappa: f64,
    /// `-log2(1 - kappa)`; NaN for negative kappa.
    pub k: f64,
    pub k12: f64,
    pub k21: f64,
    pub k_w: f64,
    pub k_max: f64,
    pub f1: f64,
    pub n: u64,
    pub capped12: bool,
    pub capped21: bool,
    pub capped_k: bool,
}

/// Cohen's kappa, evaluated exactly in integer arithmetic before a single
/// final division.
pub fn kappa(counts: &ConfusionCounts) -> Result<f64> {
    counts.validate()?;
    let n = counts.total() as i128;
    let (n1, n2) = (counts.n1() as i128, counts.n2() as i128);
    let (t1, l1, l2, t2) = (
        counts.n1_true as i128,
        counts.n1_leak as i128,
        counts.n2_leak as i128,
        counts.n2_true as i128,
    );
    // scaled by N²: observed and chance agreement
    let observed = (t1 + t2) * n;
    let chance = n1 * (t1 + l2) + n2 * (t2 + l1);
    let denom = n * n - chance;
    if denom == 0 {
        return if observed == n * n {
            Ok(1.0)
        } else {
            Err(Error::DegenerateMatrix {
                observed: observed as f64 / (n * n) as f64,
            })
        };
    }
    Ok((observed - chance) as f64 / denom as f64)
}

fn leak_rate(leak: u64, n: u64, n1: u64, n2: u64) -> (f64, bool) {
    let capped = leak == 0;
    let leak = leak.max(1) as f64;
    (-(leak * n as f64 / (n1 as f64 * n2 as f64)).log2(), capped)
}

/// `K_max = log2 N + log2(f1·f2)`: the rate reached with a single leaked entry.
pub fn k_max(n1: u64, n2: u64) -> f64 {
    let n = (n1 + n2) as f64;
    let (f1, f2) = (n1 as f64 / n, n2 as f64 / n);
    n.log2() + (f1 * f2).log2()
}

/// Average error rate from kappa; NaN for negative kappa, `+inf` at kappa = 1.
pub fn k_from_kappa(kappa: f64) -> f64 {
    if kappa < 0.0 || kappa.is_nan() {
        f64::NAN
    } else {
        -(1.0 - kappa).log2()
    }
}

/// Extracts every rate from a confusion matrix. Empty off-diagonal cells are
/// counted as one entry (which yields exactly `K_max`) and flagged; a
/// perfect kappa gives `K = K_max` flagged likewise.
pub fn rates(counts: &ConfusionCounts) -> Result<RateSummary> {
    let kappa = kappa(counts)?;
    let (n1, n2, n) = (counts.n1(), counts.n2(), counts.total());
    let f1 = n1 as f64 / n as f64;
    let f2 = 1.0 - f1;
    let (k12, capped12) = leak_rate(counts.n1_leak, n, n1, n2);
    let (k21, capped21) = leak_rate(counts.n2_leak, n, n1, n2);
    let k_max = k_max(n1, n2);
    let (k, capped_k) = if kappa >= 1.0 {
        (k_max, true)
    } else {
        (k_from_kappa(kappa), false)
    };
    Ok(RateSummary {
        kappa,
        k,
        k12,
        k21,
        k_w: f1 * k21 + f2 * k12,
        k_max,
        f1,
        n,
        capped12,
        capped21,
        capped_k,
    })
}

/// Kappa from the class-1 fraction and the two leakage rates:
/// `2(1 - f1·2^-K21 - f2·2^-K12) / (2 + Z(f1 - f2))`, `Z = 2^-K12 - 2^-K21`.
/// Defined on the closed interval `0 ≤ f1 ≤ 1`.
pub fn kappa_from_rates(f1: f64, k12: f64, k21: f64) -> f64 {
    let f2 = 1.0 - f1;
    let (e12, e21) = ((-k12).exp2(), (-k21).exp2());
    let z = e12 - e21;
    2.0 * (1.0 - f1 * e21 - f2 * e12) / (2.0 + z * (f1 - f2))
}

/// Kappa written with the class sizes and the leakage rates (bits):
/// `[2N1(1 - 2^-K21) + 2N2(1 - 2^-K12)] /
///  [N1(2 + 2^-K12 - 2^-K21) + N2(2 + 2^-K21 - 2^-K12)]`.
pub fn kappa_from_class_sizes(n1: f64, n2: f64, k12: f64, k21: f64) -> f64 {
    let (e12, e21) = ((-k12).exp2(), (-k21).exp2());
    (2.0 * n1 * (1.0 - e21) + 2.0 * n2 * (1.0 - e12)) / (n1 * (2.0 + e12 - e21) + n2 * (2.0 + e21 - e12))
}

/// `|K - K_W|`; small whenever the two leakage rates are within ~0.6 bits.
pub fn check_rate_relation(summary: &RateSummary) -> f64 {
    (summary.k - summary.k_w).abs()
}
