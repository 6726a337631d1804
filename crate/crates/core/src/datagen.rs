//! Monte Carlo samples from product reference models with independent,
//! identically specified variables.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticModel;
use crate::dataset::{ClassLabel, DatasetTable, Variable};
use crate::error::{Error, Result};

/// Description of the random streams, recorded in run metadata.
pub const GENERATOR: &str = "ChaCha8Rng, column j seeded with seed + j; \
    normal via rand_distr ziggurat; exponential via inverse CDF";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub model: AnalyticModel,
    pub n1: usize,
    pub n2: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::invalid("both class sizes must be positive"));
        }
        let leaves = self.model.leaves();
        if leaves.iter().any(|l| **l != *leaves[0]) {
            return Err(Error::invalid(
                "all variables of a generated model must share one component",
            ));
        }
        Ok(())
    }
}

fn draw(leaf: &AnalyticModel, class: ClassLabel, rng: &mut ChaCha8Rng) -> f64 {
    match (leaf, class) {
        (AnalyticModel::Gaussian { mean1, sd1, .. }, ClassLabel::One) => {
            Normal::new(*mean1, *sd1).expect("validated").sample(rng)
        }
        (AnalyticModel::Gaussian { mean2, sd2, .. }, ClassLabel::Two) => {
            Normal::new(*mean2, *sd2).expect("validated").sample(rng)
        }
        (AnalyticModel::Exponential { alpha, beta }, c) => {
            let scale = if c == ClassLabel::One { *alpha } else { *beta };
            let u: f64 = rng.random();
            -scale * (-u).ln_1p()
        }
        (AnalyticModel::Product { .. }, _) => unreachable!("leaves are one-dimensional"),
    }
}

/// Draws `n1` class-1 rows followed by `n2` class-2 rows. Variables are named
/// `V1..Vd` and classes `1` and `2`.
pub fn generate(spec: &GenSpec) -> Result<DatasetTable> {
    spec.validate()?;
    let leaves = spec.model.leaves();
    let labels: Vec<ClassLabel> = std::iter::repeat_n(ClassLabel::One, spec.n1)
        .chain(std::iter::repeat_n(ClassLabel::Two, spec.n2))
        .collect();
    let columns = leaves
        .iter()
        .enumerate()
        .map(|(j, leaf)| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(j as u64));
            labels.iter().map(|&c| draw(leaf, c, &mut rng)).collect()
        })
        .collect();
    let variables = (1..=leaves.len())
        .map(|j| Variable::continuous(format!("V{j}")))
        .collect();
    let kind = match leaves[0] {
        AnalyticModel::Gaussian { .. } => "gaussian",
        _ => "exponential",
    };
    DatasetTable::new(
        format!("{kind}-{}d", leaves.len()),
        variables,
        columns,
        labels,
        ["1".into(), "2".into()],
    )
}

fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Removes rows from exactly one class so that the class-1 fraction becomes
/// `f1_target`. The other class is kept whole, retained rows keep their
/// values and relative order.
pub fn subsample_to_f1(dataset: &DatasetTable, f1_target: f64, seed: u64) -> Result<DatasetTable> {
    if !(f1_target > 0.0 && f1_target < 1.0) {
        return Err(Error::invalid(format!(
            "target f1 must lie in (0, 1), got {f1_target}"
        )));
    }
    let (n1, n2) = (dataset.n1(), dataset.n2());
    let native = dataset.f1();
    let (reduced, keep) = if f1_target < native {
        (
            ClassLabel::One,
            round_half_up(n2 as f64 * f1_target / (1.0 - f1_target)),
        )
    } else {
        (
            ClassLabel::Two,
            round_half_up(n1 as f64 * (1.0 - f1_target) / f1_target),
        )
    };
    let have = dataset.count(reduced) as i64;
    if keep >= have {
        return Ok(dataset.clone());
    }
    if keep < 2 {
        return Err(Error::InfeasibleImbalance {
            target: f1_target,
            class: reduced.index() as u8 + 1,
            needed: keep,
        });
    }
    let rows = dataset.class_rows(reduced);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = index::sample(&mut rng, rows.len(), keep as usize)
        .into_iter()
        .map(|i| rows[i])
        .collect();
    picked.sort_unstable();
    let mut kept: Vec<usize> = (0..dataset.n_rows())
        .filter(|&i| dataset.labels[i] != reduced)
        .chain(picked)
        .collect();
    kept.sort_unstable();
    Ok(dataset.select_rows(&kept))
}
