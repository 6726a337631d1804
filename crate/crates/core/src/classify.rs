//! Baseline classifiers and stratified k-fold cross-validation producing a
//! confusion matrix.
//!
//! Every model predicts by maximum posterior with class priors taken from its
//! training split, so the confusion matrix responds to the class balance the
//! way the leakage-rate model expects. Posterior ties go to class 1.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::confusion::ConfusionCounts;
use crate::dataset::{ClassLabel, DatasetTable, VariableKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    GaussianNaiveBayes,
    CategoricalNaiveBayes,
    LogisticRegression,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::GaussianNaiveBayes => "gaussian_naive_bayes",
            ClassifierKind::CategoricalNaiveBayes => "categorical_naive_bayes",
            ClassifierKind::LogisticRegression => "logistic_regression",
        }
    }

    /// The naive Bayes variant matching an all-continuous or all-discrete
    /// table, logistic regression for mixed tables.
    pub fn default_for(dataset: &DatasetTable) -> Self {
        let discrete = dataset
            .variables
            .iter()
            .filter(|v| v.kind == VariableKind::Discrete)
            .count();
        if discrete == 0 {
            ClassifierKind::GaussianNaiveBayes
        } else if discrete == dataset.dim() {
            ClassifierKind::CategoricalNaiveBayes
        } else {
            ClassifierKind::LogisticRegression
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian_naive_bayes" | "gnb" => Ok(ClassifierKind::GaussianNaiveBayes),
            "categorical_naive_bayes" | "cnb" => Ok(ClassifierKind::CategoricalNaiveBayes),
            "logistic_regression" | "logistic" => Ok(ClassifierKind::LogisticRegression),
            other => Err(Error::invalid(format!("unknown classifier {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub folds: usize,
    pub seed: u64,
    pub smoothing_alpha: f64,
    pub l2_strength: f64,
    pub variance_floor: f64,
    /// Newton iteration cap for logistic regression.
    pub max_iter: usize,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            folds: 10,
            seed: 0,
            smoothing_alpha: 1.0,
            l2_strength: 1e-4,
            variance_floor: 1e-9,
            max_iter: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::invalid("cross-validation needs at least 2 folds"));
        }
        if !(self.smoothing_alpha >= 0.0) {
            return Err(Error::invalid("smoothing alpha must be non-negative"));
        }
        if !(self.l2_strength >= 0.0) {
            return Err(Error::invalid("l2 strength must be non-negative"));
        }
        if !(self.variance_floor > 0.0) {
            return Err(Error::invalid("variance floor must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("iteration cap must be positive"));
        }
        Ok(())
    }

    fn check_table(&self, dataset: &DatasetTable) -> Result<()> {
        let all = |k| dataset.variables.iter().all(|v| v.kind == k);
        match self.kind {
            ClassifierKind::GaussianNaiveBayes if !all(VariableKind::Continuous) => Err(Error::invalid(
                "gaussian naive Bayes needs all-continuous variables",
            )),
            ClassifierKind::CategoricalNaiveBayes if !all(VariableKind::Discrete) => Err(Error::invalid(
                "categorical naive Bayes needs all-discrete variables",
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub counts: ConfusionCounts,
    /// Folds actually used (reduced when a class is smaller than requested).
    pub folds: usize,
    pub warnings: Vec<String>,
}

/// Fold index of every row. Each class is shuffled separately and dealt
/// round-robin, continuing where the previous class stopped, so every fold
/// holds within one row of its share of each class.
pub fn stratified_folds(labels: &[ClassLabel], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in [ClassLabel::One, ClassLabel::Two] {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        rows.shuffle(&mut rng);
        for i in rows {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

/// A model fitted on one training split.
#[derive(Debug, Clone)]
pub enum Model {
    GaussianNb {
        log_prior: [f64; 2],
        mean: [Vec<f64>; 2],
        var: [Vec<f64>; 2],
    },
    CategoricalNb {
        log_prior: [f64; 2],
        /// `log_prob[c][j][category]`
        log_prob: [Vec<Vec<f64>>; 2],
    },
    Logistic {
        encoder: Encoder,
        /// Intercept first.
        weights: Vec<f64>,
    },
}

fn log_priors(dataset: &DatasetTable, rows: &[usize]) -> [f64; 2] {
    let n1 = rows
        .iter()
        .filter(|&&i| dataset.labels[i] == ClassLabel::One)
        .count() as f64;
    let n = rows.len() as f64;
    [(n1 / n).ln(), ((n - n1) / n).ln()]
}

/// Fits a model on the given rows.
pub fn train(dataset: &DatasetTable, rows: &[usize], spec: &ClassifierSpec) -> Result<Model> {
    spec.validate()?;
    spec.check_table(dataset)?;
    if rows.is_empty() {
        return Err(Error::InsufficientData("empty training split".into()));
    }
    match spec.kind {
        ClassifierKind::GaussianNaiveBayes => Ok(train_gaussian_nb(dataset, rows, spec.variance_floor)),
        ClassifierKind::CategoricalNaiveBayes => {
            Ok(train_categorical_nb(dataset, rows, spec.smoothing_alpha))
        }
        ClassifierKind::LogisticRegression => train_logistic(dataset, rows, spec),
    }
}

fn train_gaussian_nb(dataset: &DatasetTable, rows: &[usize], floor: f64) -> Model {
    let d = dataset.dim();
    let mut mean = [vec![0.0; d], vec![0.0; d]];
    let mut var = [vec![0.0; d], vec![0.0; d]];
    for c in [ClassLabel::One, ClassLabel::Two] {
        let members: Vec<usize> = rows.iter().copied().filter(|&i| dataset.labels[i] == c).collect();
        let m = members.len() as f64;
        for j in 0..d {
            let col = &dataset.columns[j];
            let mu = members.iter().map(|&i| col[i]).sum::<f64>() / m;
            let v = members.iter().map(|&i| (col[i] - mu).powi(2)).sum::<f64>() / m;
            mean[c.index()][j] = mu;
            var[c.index()][j] = if v.is_finite() { v.max(floor) } else { floor };
        }
    }
    Model::GaussianNb {
        log_prior: log_priors(dataset, rows),
        mean,
        var,
    }
}

fn train_categorical_nb(dataset: &DatasetTable, rows: &[usize], alpha: f64) -> Model {
    let mut log_prob: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
    for c in [ClassLabel::One, ClassLabel::Two] {
        let members: Vec<usize> = rows.iter().copied().filter(|&i| dataset.labels[i] == c).collect();
        for (v, col) in dataset.variables.iter().zip(&dataset.columns) {
            let k = v.categories.len();
            let mut counts = vec![0.0; k];
            for &i in &members {
                counts[col[i] as usize] += 1.0;
            }
            let total = members.len() as f64 + alpha * k as f64;
            log_prob[c.index()].push(counts.iter().map(|n| ((n + alpha) / total).ln()).collect());
        }
    }
    Model::CategoricalNb {
        log_prior: log_priors(dataset, rows),
        log_prob,
    }
}

impl Model {
    /// Log posterior scores (up to a shared constant) of classes 1 and 2.
    pub fn scores(&self, dataset: &DatasetTable, row: usize) -> [f64; 2] {
        match self {
            Model::GaussianNb { log_prior, mean, var } => {
                let mut s = *log_prior;
                for (c, sc) in s.iter_mut().enumerate() {
                    for (j, col) in dataset.columns.iter().enumerate() {
                        let v = var[c][j];
                        let z = col[row] - mean[c][j];
                        *sc -= 0.5 * (std::f64::consts::TAU * v).ln() + z * z / (2.0 * v);
                    }
                }
                s
            }
            Model::CategoricalNb { log_prior, log_prob } => {
                let mut s = *log_prior;
                for (c, sc) in s.iter_mut().enumerate() {
                    for (j, col) in dataset.columns.iter().enumerate() {
                        *sc += log_prob[c][j][col[row] as usize];
                    }
                }
                s
            }
            Model::Logistic { encoder, weights } => {
                let x = encoder.encode(dataset, row);
                let eta: f64 = x.iter().zip(weights).map(|(a, b)| a * b).sum();
                // log odds of class 1 against class 2
                [eta, 0.0]
            }
        }
    }

    pub fn predict(&self, dataset: &DatasetTable, row: usize) -> ClassLabel {
        let [s1, s2] = self.scores(dataset, row);
        if s1 >= s2 {
            ClassLabel::One
        } else {
            ClassLabel::Two
        }
    }
}

/// Design-matrix encoding learnt on a training split: continuous variables
/// standardised, discrete variables one-hot with the first category as
/// reference. A leading 1 carries the intercept.
#[derive(Debug, Clone)]
pub struct Encoder {
    columns: Vec<ColumnCode>,
    width: usize,
}

#[derive(Debug, Clone)]
enum ColumnCode {
    Scaled { mean: f64, scale: f64 },
    OneHot { levels: usize },
}

impl Encoder {
    fn fit(dataset: &DatasetTable, rows: &[usize]) -> Self {
        let mut width = 1;
        let columns = dataset
            .variables
            .iter()
            .zip(&dataset.columns)
            .map(|(v, col)| match v.kind {
                VariableKind::Continuous => {
                    let m = rows.len() as f64;
                    let mean = rows.iter().map(|&i| col[i]).sum::<f64>() / m;
                    let sd = (rows.iter().map(|&i| (col[i] - mean).powi(2)).sum::<f64>() / m).sqrt();
                    width += 1;
                    ColumnCode::Scaled {
                        mean,
                        scale: if sd > 0.0 { sd } else { 1.0 },
                    }
                }
                VariableKind::Discrete => {
                    let levels = v.categories.len().saturating_sub(1);
                    width += levels;
                    ColumnCode::OneHot { levels }
                }
            })
            .collect();
        Self { columns, width }
    }

    fn encode(&self, dataset: &DatasetTable, row: usize) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.width);
        x.push(1.0);
        for (code, col) in self.columns.iter().zip(&dataset.columns) {
            match *code {
                ColumnCode::Scaled { mean, scale } => x.push((col[row] - mean) / scale),
                ColumnCode::OneHot { levels } => {
                    let cat = col[row] as usize;
                    x.extend((1..=levels).map(|l| if l == cat { 1.0 } else { 0.0 }));
                }
            }
        }
        x
    }
}

/// Penalised mean negative log-likelihood of logistic regression and its
/// gradient. Rows of `x` start with the intercept column; `y` is 1 for
/// class 1. The intercept is not penalised.
pub fn logistic_objective(w: &[f64], x: &[Vec<f64>], y: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    let mut f = 0.0;
    let mut g = vec![0.0; w.len()];
    for (xi, &yi) in x.iter().zip(y) {
        let eta: f64 = xi.iter().zip(w).map(|(a, b)| a * b).sum();
        // log(1 + e^eta) - y·eta, written to avoid overflow
        f += eta.max(0.0) + (-eta.abs()).exp().ln_1p() - yi * eta;
        let r = sigmoid(eta) - yi;
        for (gj, xj) in g.iter_mut().zip(xi) {
            *gj += r * xj;
        }
    }
    f /= n;
    for gj in g.iter_mut() {
        *gj /= n;
    }
    for j in 1..w.len() {
        f += 0.5 * l2 * w[j] * w[j];
        g[j] += l2 * w[j];
    }
    (f, g)
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const GRADIENT_TOL: f64 = 1e-6;

/// Newton's method with backtracking on [`logistic_objective`].
pub fn fit_logistic(x: &[Vec<f64>], y: &[f64], l2: f64, max_iter: usize) -> Result<Vec<f64>> {
    let p = x.first().map_or(1, Vec::len);
    let n = x.len() as f64;
    let mut w = vec![0.0; p];
    let (mut f, mut g) = logistic_objective(&w, x, y, l2);
    for _ in 0..max_iter {
        if norm(&g) <= GRADIENT_TOL {
            return Ok(w);
        }
        let mut h = DMatrix::<f64>::zeros(p, p);
        for xi in x {
            let eta: f64 = xi.iter().zip(&w).map(|(a, b)| a * b).sum();
            let s = sigmoid(eta);
            let wt = s * (1.0 - s) / n;
            for a in 0..p {
                if xi[a] == 0.0 {
                    continue;
                }
                for b in 0..=a {
                    h[(a, b)] += wt * xi[a] * xi[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                h[(b, a)] = h[(a, b)];
            }
            // penalty, plus a tiny ridge keeping the intercept block invertible
            h[(a, a)] += if a == 0 { 1e-12 } else { l2 + 1e-12 };
        }
        let grad = DVector::from_column_slice(&g);
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => grad.clone(),
        };
        let mut t = 1.0;
        let slope: f64 = step.dot(&grad);
        loop {
            let trial: Vec<f64> = w.iter().zip(step.iter()).map(|(wi, si)| wi - t * si).collect();
            let (ft, gt) = logistic_objective(&trial, x, y, l2);
            if ft <= f - 1e-4 * t * slope || t < 1e-10 {
                w = trial;
                f = ft;
                g = gt;
                break;
            }
            t *= 0.5;
        }
    }
    let gradient_norm = norm(&g);
    if gradient_norm <= GRADIENT_TOL {
        Ok(w)
    } else {
        Err(Error::NonConvergence {
            iterations: max_iter,
            gradient_norm,
        })
    }
}

fn train_logistic(dataset: &DatasetTable, rows: &[usize], spec: &ClassifierSpec) -> Result<Model> {
    let encoder = Encoder::fit(dataset, rows);
    let x: Vec<Vec<f64>> = rows.iter().map(|&i| encoder.encode(dataset, i)).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|&i| {
            if dataset.labels[i] == ClassLabel::One {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let weights = fit_logistic(&x, &y, spec.l2_strength, spec.max_iter)?;
    Ok(Model::Logistic { encoder, weights })
}

/// Stratified k-fold cross-validation; every row is classified once by a
/// model trained on the other folds, and the fold matrices are summed.
pub fn cross_validate(dataset: &DatasetTable, spec: &ClassifierSpec) -> Result<CrossValidation> {
    spec.validate()?;
    spec.check_table(dataset)?;
    dataset.validate()?;
    let smallest = dataset.n1().min(dataset.n2());
    if smallest < 2 {
        return Err(Error::InsufficientData(format!(
            "cross-validation needs at least 2 rows per class (N1 = {}, N2 = {})",
            dataset.n1(),
            dataset.n2()
        )));
    }
    let mut warnings = Vec::new();
    let folds = if smallest < spec.folds {
        warnings.push(format!(
            "smallest class has {smallest} rows; folds reduced from {} to {smallest}",
            spec.folds
        ));
        smallest
    } else {
        spec.folds
    };
    let assignment = stratified_folds(&dataset.labels, folds, spec.seed);
    let per_fold = crate::par_map(folds, |fold| -> Result<ConfusionCounts> {
        let (test, train_rows): (Vec<usize>, Vec<usize>) =
            (0..dataset.n_rows()).partition(|&i| assignment[i] == fold);
        let model = train(dataset, &train_rows, spec)?;
        let mut c = ConfusionCounts::default();
        for i in test {
            match (dataset.labels[i], model.predict(dataset, i)) {
                (ClassLabel::One, ClassLabel::One) => c.n1_true += 1,
                (ClassLabel::One, ClassLabel::Two) => c.n1_leak += 1,
                (ClassLabel::Two, ClassLabel::One) => c.n2_leak += 1,
                (ClassLabel::Two, ClassLabel::Two) => c.n2_true += 1,
            }
        }
        Ok(c)
    });
    let mut counts = ConfusionCounts::default();
    for c in per_fold {
        counts.add(&c?);
    }
    Ok(CrossValidation {
        counts,
        folds,
        warnings,
    })
}
