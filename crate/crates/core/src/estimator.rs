//! Nearest-neighbour estimates of the two class-conditional KL divergences
//! (class distance indicators, CDI) and their parallel-resistor combination
//! (CDR).
//!
//! Every variable is first mapped to equal-frequency bins computed on the
//! pooled column, then each bin or category index gets a uniform jitter in
//! `[0, 1)`. Continuous, discrete and mixed tables therefore go through the
//! same code path, and the estimate is unchanged by any strictly increasing
//! transform of a continuous variable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::resistor_average;
use crate::dataset::{ClassLabel, DatasetTable, VariableKind};
use crate::error::{Error, Result};
use crate::knn::{KdTree, PointCloud};
use crate::numeric::{mean, standard_error};

/// Upper bound on the default bin count.
pub const MAX_DEFAULT_BINS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Bins per continuous variable; `None` means `⌈√N⌉` capped at
    /// [`MAX_DEFAULT_BINS`], with `N` the pooled row count.
    pub bins: Option<usize>,
    /// Neighbour order.
    pub k: usize,
    /// Number of jitter replicates averaged.
    pub repeats: usize,
    pub seed: u64,
    pub distance_floor: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            bins: None,
            k: 1,
            repeats: 10,
            seed: 0,
            distance_floor: 1e-12,
        }
    }
}

impl EstimatorConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.bins, Some(b) if b < 2) {
            return Err(Error::invalid("bins per variable must be at least 2"));
        }
        if self.k < 1 {
            return Err(Error::invalid("neighbour order k must be at least 1"));
        }
        if self.repeats < 1 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        if !(self.distance_floor > 0.0) {
            return Err(Error::invalid("distance floor must be positive"));
        }
        Ok(())
    }

    /// Bin count used for a table with `n` pooled rows.
    pub fn bins_for(&self, n: usize) -> usize {
        self.bins.unwrap_or_else(|| default_bins(n))
    }
}

pub fn default_bins(n: usize) -> usize {
    let mut b = (n as f64).sqrt().ceil() as usize;
    // guard against floating error in the square root
    while b * b < n {
        b += 1;
    }
    while b > 1 && (b - 1) * (b - 1) >= n {
        b -= 1;
    }
    b.clamp(2, MAX_DEFAULT_BINS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEstimate {
    pub cdi12: f64,
    pub cdi21: f64,
    /// `None` when either mean CDI is not positive.
    pub cdr: Option<f64>,
    pub se12: f64,
    pub se21: f64,
    pub repeats: usize,
    pub bins: usize,
    pub n1: usize,
    pub n2: usize,
    pub dim: usize,
    pub replicates12: Vec<f64>,
    pub replicates21: Vec<f64>,
    pub config: EstimatorConfig,
}

/// Interior bin edges giving bins of counts as equal as ties permit.
///
/// Edges sit halfway between adjacent distinct values. A column with at most
/// `bins` distinct values gets one bin per value; a constant column gets no
/// edges (a single bin).
pub fn bin_equal_entropy(column: &[f64], bins: usize) -> Result<Vec<f64>> {
    if bins < 2 {
        return Err(Error::invalid("bins must be at least 2"));
    }
    if column.len() < bins {
        return Err(Error::invalid(format!(
            "column of {} values cannot fill {bins} bins",
            column.len()
        )));
    }
    if let Some(bad) = column.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite value {bad} in binned column")));
    }
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();

    // Candidate cut positions: p such that sorted[p-1] < sorted[p].
    let cuts: Vec<usize> = (1..n).filter(|&p| sorted[p - 1] < sorted[p]).collect();
    let edge_at = |p: usize| sorted[p - 1] + (sorted[p] - sorted[p - 1]) / 2.0;
    if cuts.len() < bins {
        return Ok(cuts.into_iter().map(edge_at).collect());
    }

    let mut chosen: Vec<usize> = Vec::with_capacity(bins - 1);
    for b in 1..bins {
        let target = (b as f64 * n as f64 / bins as f64).round() as usize;
        // nearest admissible cut, preferring the lower one on a tie
        let idx = cuts.partition_point(|&p| p < target);
        let below = idx.checked_sub(1).map(|i| cuts[i]);
        let above = cuts.get(idx).copied();
        let pick = match (below, above) {
            (Some(lo), Some(hi)) => {
                if target - lo <= hi - target {
                    lo
                } else {
                    hi
                }
            }
            (Some(lo), None) => lo,
            (None, Some(hi)) => hi,
            (None, None) => unreachable!("cuts is non-empty"),
        };
        if chosen.last() != Some(&pick) {
            chosen.push(pick);
        }
    }
    chosen.sort_unstable();
    chosen.dedup();
    Ok(chosen.into_iter().map(edge_at).collect())
}

/// Index of the bin holding `x`, given ascending interior edges.
pub fn bin_index(edges: &[f64], x: f64) -> usize {
    edges.partition_point(|&e| e <= x)
}

/// Per-variable discretisation shared by all replicates of one estimate.
#[derive(Debug, Clone)]
struct Encoding {
    /// Integer code of each cell, column-major.
    codes: Vec<Vec<u32>>,
}

fn encode(dataset: &DatasetTable, bins: usize) -> Result<Encoding> {
    let codes = dataset
        .variables
        .iter()
        .zip(&dataset.columns)
        .map(|(v, col)| match v.kind {
            VariableKind::Discrete => Ok(col.iter().map(|&x| x as u32).collect()),
            VariableKind::Continuous => {
                let edges = bin_equal_entropy(col, bins.min(col.len()))?;
                Ok(col.iter().map(|&x| bin_index(&edges, x) as u32).collect())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Encoding { codes })
}

fn jitter(dataset: &DatasetTable, enc: &Encoding, seed: u64) -> (PointCloud, PointCloud) {
    let d = dataset.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c1 = Vec::with_capacity(dataset.n1() * d);
    let mut c2 = Vec::with_capacity(dataset.n2() * d);
    for (i, label) in dataset.labels.iter().enumerate() {
        let target = match label {
            ClassLabel::One => &mut c1,
            ClassLabel::Two => &mut c2,
        };
        for codes in &enc.codes {
            target.push(codes[i] as f64 + rng.random::<f64>());
        }
    }
    (PointCloud::new(d, c1), PointCloud::new(d, c2))
}

/// Jittered point clouds of classes 1 and 2 for replicate seed `seed`.
///
/// Uniform draws are taken in row order over the pooled table, so the clouds
/// depend only on the bin codes, the row order and the seed.
pub fn jitter_encode(dataset: &DatasetTable, config: &EstimatorConfig) -> Result<(PointCloud, PointCloud)> {
    config.validate()?;
    dataset.validate()?;
    let enc = encode(dataset, config.bins_for(dataset.n_rows()))?;
    Ok(jitter(dataset, &enc, config.seed))
}

/// Class distance indicator CDI(1,2) in bits:
/// `(d/N1) Σ log2(λ12/λ1) + log2(N2/(N1-1))`, where `λ1` is the distance from
/// each class-1 point to its k-th nearest other class-1 point and `λ12` to its
/// k-th nearest class-2 point.
pub fn cdi(cloud1: &PointCloud, cloud2: &PointCloud, k: usize, distance_floor: f64) -> Result<f64> {
    let n1 = cloud1.len();
    let n2 = cloud2.len();
    if n1 < 2 || n2 < 2 {
        return Err(Error::InsufficientData(format!(
            "each class needs at least 2 points (N1 = {n1}, N2 = {n2})"
        )));
    }
    if n1 - 1 < k || n2 < k {
        return Err(Error::InsufficientData(format!(
            "neighbour order {k} exceeds available points (N1 = {n1}, N2 = {n2})"
        )));
    }
    if cloud1.dim() != cloud2.dim() {
        return Err(Error::invalid("point clouds differ in dimension"));
    }
    let d = cloud1.dim() as f64;
    let own = KdTree::build(cloud1);
    let other = KdTree::build(cloud2);
    let term = |i: usize| {
        let q = cloud1.point(i);
        let l1 = own
            .kth_distance(q, k, Some(i))
            .expect("k checked")
            .max(distance_floor);
        let l12 = other
            .kth_distance(q, k, None)
            .expect("k checked")
            .max(distance_floor);
        (l12 / l1).log2()
    };
    let terms = crate::par_map(n1, term);
    // summed in index order so the result does not depend on scheduling
    let sum: f64 = terms.iter().sum();
    Ok(d / n1 as f64 * sum + (n2 as f64 / (n1 - 1) as f64).log2())
}

/// Averages CDI(1,2) and CDI(2,1) over `config.repeats` jitter replicates,
/// replicate `r` using seed `config.seed + r`.
pub fn estimate(dataset: &DatasetTable, config: &EstimatorConfig) -> Result<DivergenceEstimate> {
    config.validate()?;
    dataset.validate()?;
    if dataset.n1() < 2 || dataset.n2() < 2 {
        return Err(Error::InsufficientData(format!(
            "each class needs at least 2 rows (N1 = {}, N2 = {})",
            dataset.n1(),
            dataset.n2()
        )));
    }
    let bins = config.bins_for(dataset.n_rows());
    let enc = encode(dataset, bins)?;
    let mut rep12 = Vec::with_capacity(config.repeats);
    let mut rep21 = Vec::with_capacity(config.repeats);
    for r in 0..config.repeats {
        let (c1, c2) = jitter(dataset, &enc, config.seed.wrapping_add(r as u64));
        rep12.push(cdi(&c1, &c2, config.k, config.distance_floor)?);
        rep21.push(cdi(&c2, &c1, config.k, config.distance_floor)?);
    }
    let cdi12 = mean(&rep12);
    let cdi21 = mean(&rep21);
    Ok(DivergenceEstimate {
        cdi12,
        cdi21,
        cdr: resistor_average(cdi12, cdi21).ok(),
        se12: standard_error(&rep12),
        se21: standard_error(&rep21),
        repeats: config.repeats,
        bins,
        n1: dataset.n1(),
        n2: dataset.n2(),
        dim: dataset.dim(),
        replicates12: rep12,
        replicates21: rep21,
        config: config.clone(),
    })
}
