//! Class-balance sweeps, the straight-line leakage-rate model fitted to them,
//! the balance point, predicted kappa curves and the kappa-limit verdict.
//!
//! The model: `K12(f1) = Δ1(1 - f1) + D21·f1` rises from the minority floor
//! `Δ1` to `D(2,1)`, and `K21(f1) = D12(1 - f1) + Δ2·f1` falls from `D(1,2)`
//! to `Δ2`, with `0 ≤ Δ1 ≤ D21` and `0 ≤ Δ2 ≤ D12`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::classify::{cross_validate, ClassifierSpec};
use crate::confusion::{kappa_from_rates, rates, ConfusionCounts, RateSummary};
use crate::datagen::subsample_to_f1;
use crate::dataset::DatasetTable;
use crate::error::{Error, Result};
use crate::estimator::{estimate, DivergenceEstimate, EstimatorConfig};
use crate::numeric::linefit::{fit_line, Monotone};
use crate::table::{format_sig, join_row};

/// `0.05, 0.10, …, 0.95`.
pub fn default_grid() -> Vec<f64> {
    (1..=19).map(|i| f64::from(i) / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Requested class-1 fraction.
    pub f1_target: f64,
    /// Achieved class-1 fraction of the subsample.
    pub f1: f64,
    pub counts: ConfusionCounts,
    pub rates: RateSummary,
    pub divergence: DivergenceEstimate,
    pub folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub f1_target: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub native_f1: f64,
    pub points: Vec<SweepPoint>,
    pub skipped: Vec<SkippedPoint>,
    pub warnings: Vec<String>,
}

/// At each grid value (plus the native fraction): subsample one class,
/// cross-validate the classifier and estimate the divergences on the same
/// subsample. Infeasible grid values are skipped and recorded. Subsampling
/// uses `seed`; the classifier and estimator use their own seeds.
pub fn sweep(
    dataset: &DatasetTable,
    grid: &[f64],
    classifier: &ClassifierSpec,
    estimator: &EstimatorConfig,
    seed: u64,
) -> Result<SweepRun> {
    dataset.validate()?;
    classifier.validate()?;
    estimator.validate()?;
    let native = dataset.f1();
    let mut targets: Vec<f64> = grid.to_vec();
    if let Some(bad) = targets.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
        return Err(Error::invalid(format!("grid value {bad} outside (0, 1)")));
    }
    if !targets.iter().any(|f| (f - native).abs() < 1e-9) {
        targets.push(native);
    }
    targets.sort_by(f64::total_cmp);

    let results = crate::par_map(targets.len(), |i| -> Result<SweepPoint> {
        let sub = subsample_to_f1(dataset, targets[i], seed)?;
        let cv = cross_validate(&sub, classifier)?;
        Ok(SweepPoint {
            f1_target: targets[i],
            f1: sub.f1(),
            counts: cv.counts,
            rates: rates(&cv.counts)?,
            divergence: estimate(&sub, estimator)?,
            folds: cv.folds,
        })
    });
    let mut run = SweepRun {
        native_f1: native,
        points: Vec::new(),
        skipped: Vec::new(),
        warnings: Vec::new(),
    };
    for (f, r) in targets.into_iter().zip(results) {
        match r {
            Ok(p) => {
                if p.folds < classifier.folds {
                    run.warnings
                        .push(format!("f1 = {f}: folds reduced to {}", p.folds));
                }
                run.points.push(p);
            }
            Err(e @ (Error::InfeasibleImbalance { .. } | Error::InsufficientData(_))) => {
                run.skipped.push(SkippedPoint {
                    f1_target: f,
                    reason: e.to_string(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(run)
}

/// Writes one row per sweep point.
pub fn write_sweep_table<W: Write>(
    points: &[SweepPoint],
    mut out: W,
    delimiter: char,
) -> std::io::Result<()> {
    const HEADER: [&str; 21] = [
        "f1_target",
        "f1",
        "n1",
        "n2",
        "n1_true",
        "n1_leak",
        "n2_leak",
        "n2_true",
        "kappa",
        "k",
        "k12",
        "k21",
        "k_w",
        "k_max",
        "capped12",
        "capped21",
        "cdi12",
        "cdi21",
        "cdr",
        "se12",
        "se21",
    ];
    writeln!(out, "{}", join_row(HEADER, delimiter))?;
    for p in points {
        let c = &p.counts;
        let r = &p.rates;
        let d = &p.divergence;
        let g = |x: f64| format_sig(x, 9);
        let row = [
            g(p.f1_target),
            g(p.f1),
            c.n1().to_string(),
            c.n2().to_string(),
            c.n1_true.to_string(),
            c.n1_leak.to_string(),
            c.n2_leak.to_string(),
            c.n2_true.to_string(),
            g(r.kappa),
            g(r.k),
            g(r.k12),
            g(r.k21),
            g(r.k_w),
            g(r.k_max),
            r.capped12.to_string(),
            r.capped21.to_string(),
            g(d.cdi12),
            g(d.cdi21),
            d.cdr.map_or_else(|| "nan".to_string(), g),
            g(d.se12),
            g(d.se21),
        ];
        writeln!(out, "{}", join_row(row, delimiter))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Only sweep points with `window.0 ≤ f1 ≤ window.1` enter the fit.
    pub window: (f64, f64),
    /// Divergence estimates `(CDI(1,2), CDI(2,1))` added as the pseudo-points
    /// `K21(0) = CDI(1,2)` and `K12(1) = CDI(2,1)`.
    pub anchors: Option<(f64, f64)>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            window: (0.15, 0.85),
            anchors: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub delta1: f64,
    pub d21_fit: f64,
    pub delta2: f64,
    pub d12_fit: f64,
    pub se_delta1: f64,
    pub se_d21: f64,
    pub se_delta2: f64,
    pub se_d12: f64,
    /// Approximate balance point.
    pub f_b: f64,
    /// `D12 / (D12 + D21)` of the fitted lines.
    pub t_r: f64,
    pub residual_rms: f64,
    pub points12: usize,
    pub points21: usize,
    /// True when a box constraint is active at the optimum.
    pub constrained: bool,
}

impl FitResult {
    pub fn k12(&self, f1: f64) -> f64 {
        self.delta1 * (1.0 - f1) + self.d21_fit * f1
    }

    pub fn k21(&self, f1: f64) -> f64 {
        self.d12_fit * (1.0 - f1) + self.delta2 * f1
    }
}

/// The part of a sweep point the line fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub f1: f64,
    pub k12: f64,
    pub k21: f64,
    pub capped12: bool,
    pub capped21: bool,
}

impl From<&SweepPoint> for RatePoint {
    fn from(p: &SweepPoint) -> Self {
        RatePoint {
            f1: p.f1,
            k12: p.rates.k12,
            k21: p.rates.k21,
            capped12: p.rates.capped12,
            capped21: p.rates.capped21,
        }
    }
}

/// Fits both lines to sweep points. Capped rates and points outside the
/// window are left out.
pub fn fit_leakage_model(points: &[SweepPoint], options: &FitOptions) -> Result<FitResult> {
    let rate_points: Vec<RatePoint> = points.iter().map(RatePoint::from).collect();
    fit_rate_points(&rate_points, options)
}

pub fn fit_rate_points(points: &[RatePoint], options: &FitOptions) -> Result<FitResult> {
    let (lo, hi) = options.window;
    if !(lo < hi) {
        return Err(Error::invalid(format!("fit window [{lo}, {hi}] is empty")));
    }
    // achieved fractions sit within 1/(2N) of their grid values
    let slack = 1e-3;
    let inside = || points.iter().filter(|p| p.f1 >= lo - slack && p.f1 <= hi + slack);
    let line12: Vec<(f64, f64)> = inside()
        .filter(|p| !p.capped12 && p.k12.is_finite())
        .map(|p| (p.f1, p.k12))
        .collect();
    let line21: Vec<(f64, f64)> = inside()
        .filter(|p| !p.capped21 && p.k21.is_finite())
        .map(|p| (p.f1, p.k21))
        .collect();
    fit_rate_lines(&line12, &line21, options.anchors)
}

/// Fits `(f1, K12)` and `(f1, K21)` observations directly.
pub fn fit_rate_lines(
    line12: &[(f64, f64)],
    line21: &[(f64, f64)],
    anchors: Option<(f64, f64)>,
) -> Result<FitResult> {
    if line12.len() < 3 {
        return Err(Error::InsufficientSweep {
            line: "k12",
            usable: line12.len(),
        });
    }
    if line21.len() < 3 {
        return Err(Error::InsufficientSweep {
            line: "k21",
            usable: line21.len(),
        });
    }
    let (mut x12, mut y12): (Vec<f64>, Vec<f64>) = line12.iter().copied().unzip();
    let (mut x21, mut y21): (Vec<f64>, Vec<f64>) = line21.iter().copied().unzip();
    if let Some((cdi12, cdi21)) = anchors {
        x12.push(1.0);
        y12.push(cdi21);
        x21.push(0.0);
        y21.push(cdi12);
    }
    let a = fit_line(&x12, &y12, Monotone::Increasing);
    let b = fit_line(&x21, &y21, Monotone::Decreasing);
    let (delta1, d21, delta2, d12) = (a.start, a.end, b.end, b.start);
    let n = a.points + b.points;
    Ok(FitResult {
        delta1,
        d21_fit: d21,
        delta2,
        d12_fit: d12,
        se_delta1: a.se_start,
        se_d21: a.se_end,
        se_delta2: b.se_end,
        se_d12: b.se_start,
        f_b: balance_approx(delta1, d21, delta2, d12),
        t_r: d12 / (d12 + d21),
        residual_rms: ((a.residual_ss + b.residual_ss) / n as f64).sqrt(),
        points12: a.points,
        points21: b.points,
        constrained: a.constrained || b.constrained,
    })
}

/// `D12/(D12+D21) · [1 + (Δ1+Δ2)/(D12+D21) - Δ1/D12]`.
pub fn balance_approx(delta1: f64, d21: f64, delta2: f64, d12: f64) -> f64 {
    let s = d12 + d21;
    d12 / s * (1.0 + (delta1 + delta2) / s - delta1 / d12)
}

/// Where the fitted lines cross; `None` for parallel lines.
pub fn exact_crossing(delta1: f64, d21: f64, delta2: f64, d12: f64) -> Option<f64> {
    let slope = (d21 - delta1) + (d12 - delta2);
    (slope.abs() > 1e-15).then(|| (d12 - delta1) / slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalancePoint {
    pub f_b: f64,
    pub exact: Option<f64>,
    /// False when the lines are parallel or meet outside `[0, 1]`.
    pub crossing: bool,
}

pub fn balance_point(fit: &FitResult) -> BalancePoint {
    let exact = exact_crossing(fit.delta1, fit.d21_fit, fit.delta2, fit.d12_fit);
    BalancePoint {
        f_b: balance_approx(fit.delta1, fit.d21_fit, fit.delta2, fit.d12_fit),
        exact,
        crossing: exact.is_some_and(|f| (0.0..=1.0).contains(&f)),
    }
}

/// `(f1, K12, K21, kappa)` along the fitted lines.
pub fn predict_kappa_curve(fit: &FitResult, grid: &[f64]) -> Vec<(f64, f64, f64, f64)> {
    grid.iter()
        .map(|&f| {
            let (k12, k21) = (fit.k12(f), fit.k21(f));
            (f, k12, k21, kappa_from_rates(f, k12, k21))
        })
        .collect()
}

pub fn write_kappa_curve<W: Write>(
    curve: &[(f64, f64, f64, f64)],
    mut out: W,
    delimiter: char,
) -> std::io::Result<()> {
    writeln!(out, "{}", join_row(["f1", "k12", "k21", "kappa"], delimiter))?;
    for &(f, a, b, k) in curve {
        writeln!(
            out,
            "{}",
            join_row([f, a, b, k].map(|x| format_sig(x, 9)), delimiter)
        )?;
    }
    Ok(())
}

/// `1 - 2^(-CDR)`.
pub fn kappa_limit(cdr: f64) -> f64 {
    1.0 - (-cdr).exp2()
}

pub const DEFAULT_TOLERANCE: f64 = 0.08;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    AtLimit,
    BelowLimit,
    AboveLimitCheckEstimator,
    NoVerdict,
}

impl VerdictStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictStatus::AtLimit => "at-limit",
            VerdictStatus::BelowLimit => "below-limit",
            VerdictStatus::AboveLimitCheckEstimator => "above-limit-check-estimator",
            VerdictStatus::NoVerdict => "no-verdict",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub kappa_observed: f64,
    pub cdr: Option<f64>,
    pub kappa_limit: Option<f64>,
    /// `kappa_limit - kappa_observed`.
    pub gap: Option<f64>,
    pub tolerance: f64,
}

/// Compares a measured kappa with the limit implied by the estimated CDR.
pub fn verdict(kappa_observed: f64, estimate: &DivergenceEstimate, tolerance: f64) -> Verdict {
    verdict_for_cdr(kappa_observed, estimate.cdr, tolerance)
}

/// Verdict against a CDR supplied directly; `None` gives `NoVerdict`.
pub fn verdict_for_cdr(kappa_observed: f64, cdr: Option<f64>, tolerance: f64) -> Verdict {
    let Some(cdr) = cdr else {
        return Verdict {
            status: VerdictStatus::NoVerdict,
            kappa_observed,
            cdr: None,
            kappa_limit: None,
            gap: None,
            tolerance,
        };
    };
    let limit = kappa_limit(cdr);
    let gap = limit - kappa_observed;
    let status = if gap.abs() <= tolerance {
        VerdictStatus::AtLimit
    } else if gap > tolerance {
        VerdictStatus::BelowLimit
    } else {
        VerdictStatus::AboveLimitCheckEstimator
    };
    Verdict {
        status,
        kappa_observed,
        cdr: Some(cdr),
        kappa_limit: Some(limit),
        gap: Some(gap),
        tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        default_grid().into_iter().map(|x| (x, f(x))).collect()
    }

    fn fit_of(delta1: f64, d21: f64, delta2: f64, d12: f64) -> FitResult {
        fit_rate_lines(
            &line(|f| delta1 * (1.0 - f) + d21 * f),
            &line(|f| d12 * (1.0 - f) + delta2 * f),
            None,
        )
        .unwrap()
    }

    #[test]
    fn noiseless_lines_recovered() {
        let fit = fit_rate_lines(&line(|f| 0.5 + 2.0 * f), &line(|f| 3.0 - 2.5 * f), None).unwrap();
        assert!((fit.delta1 - 0.5).abs() < 1e-9);
        assert!((fit.d21_fit - 2.5).abs() < 1e-9);
        assert!((fit.d12_fit - 3.0).abs() < 1e-9);
        assert!((fit.delta2 - 0.5).abs() < 1e-9);
        assert!(fit.residual_rms < 1e-9);
        assert!(!fit.constrained);
    }

    #[test]
    fn anchors_enter_as_pseudo_points() {
        let pts12 = [(0.3, 1.0), (0.5, 1.0), (0.7, 1.0)];
        let pts21 = [(0.3, 1.0), (0.5, 1.0), (0.7, 1.0)];
        let plain = fit_rate_lines(&pts12, &pts21, None).unwrap();
        assert!((plain.d21_fit - 1.0).abs() < 1e-12);
        let anchored = fit_rate_lines(&pts12, &pts21, Some((2.0, 2.0))).unwrap();
        assert!(anchored.d21_fit > 1.5 && anchored.d12_fit > 1.5);
        assert_eq!(anchored.points12, 4);
    }

    #[test]
    fn window_and_caps_filter_points() {
        let mut pts: Vec<RatePoint> = default_grid()
            .into_iter()
            .map(|f| RatePoint {
                f1: f,
                k12: 0.5 + 2.0 * f,
                k21: 3.0 - 2.5 * f,
                capped12: false,
                capped21: false,
            })
            .collect();
        pts[9].k12 = 40.0;
        pts[9].capped12 = true;
        let fit = fit_rate_points(&pts, &FitOptions::default()).unwrap();
        assert_eq!((fit.points12, fit.points21), (14, 15));
        assert!((fit.delta1 - 0.5).abs() < 1e-9);
        assert!(fit_rate_points(
            &pts,
            &FitOptions {
                window: (0.6, 0.4),
                anchors: None
            }
        )
        .is_err());
    }

    #[test]
    fn too_few_points() {
        let two = [(0.3, 1.0), (0.5, 1.0)];
        let three = [(0.3, 1.0), (0.5, 1.0), (0.6, 1.0)];
        assert!(matches!(
            fit_rate_lines(&two, &three, None),
            Err(Error::InsufficientSweep {
                line: "k12",
                usable: 2
            })
        ));
        assert!(matches!(
            fit_rate_lines(&three, &two, None),
            Err(Error::InsufficientSweep {
                line: "k21",
                usable: 2
            })
        ));
    }

    #[test]
    fn balance_points() {
        assert!((balance_approx(0.4, 2.0, 0.4, 2.0) - 0.5).abs() < 1e-15);
        assert!((balance_approx(0.01, 3.18, 0.47, 1.67) - 0.376).abs() < 5e-4);
        let bp = balance_point(&fit_of(0.3, 2.0, 0.3, 2.0));
        assert!(bp.crossing);
        assert!((bp.exact.unwrap() - 0.5).abs() < 1e-9);
        // both lines flat at the same value: parallel, never crossing
        let flat = fit_of(1.0, 1.0, 1.0, 1.0);
        assert_eq!(
            exact_crossing(flat.delta1, flat.d21_fit, flat.delta2, flat.d12_fit),
            None
        );
        assert!(!balance_point(&flat).crossing);
    }

    #[test]
    fn kappa_curve_shape() {
        let sym = fit_of(0.7, 2.6, 0.7, 2.6);
        let grid: Vec<f64> = (0..=100).map(|i| f64::from(i) / 100.0).collect();
        let curve = predict_kappa_curve(&sym, &grid);
        for (a, b) in curve.iter().zip(curve.iter().rev()) {
            assert!((a.3 - b.3).abs() < 1e-12);
        }
        // exponential-like fit: no floor for class 1, a floor for class 2
        let exp = FitResult {
            delta1: 0.0,
            ..fit_of(0.01, 3.18, 0.47, 1.67)
        };
        let ends = predict_kappa_curve(&exp, &[0.0, 1e-6, 1.0]);
        assert_eq!(ends[0].3, 0.0);
        assert!(ends[1].3 < 1e-5);
        assert!(ends[2].3 > 0.0);
    }

    #[test]
    fn verdict_thresholds() {
        assert_eq!(kappa_limit(1.0), 0.5);
        assert_eq!(kappa_limit(0.0), 0.0);
        assert!((kappa_limit(1.28) - 0.588).abs() < 1e-3);
        let est = |cdr: Option<f64>| DivergenceEstimate {
            cdi12: 1.0,
            cdi21: 1.0,
            cdr,
            se12: 0.0,
            se21: 0.0,
            repeats: 1,
            bins: 2,
            n1: 2,
            n2: 2,
            dim: 1,
            replicates12: vec![],
            replicates21: vec![],
            config: EstimatorConfig::default(),
        };
        assert_eq!(
            verdict(0.45, &est(Some(1.0)), 0.08).status,
            VerdictStatus::AtLimit
        );
        assert_eq!(
            verdict(0.3, &est(Some(1.0)), 0.08).status,
            VerdictStatus::BelowLimit
        );
        assert_eq!(
            verdict(0.7, &est(Some(1.0)), 0.08).status,
            VerdictStatus::AboveLimitCheckEstimator
        );
        assert_eq!(verdict(0.7, &est(None), 0.08).status, VerdictStatus::NoVerdict);
        assert_eq!(
            VerdictStatus::AboveLimitCheckEstimator.as_str(),
            "above-limit-check-estimator"
        );
    }

    proptest! {
        #[test]
        fn limit_is_monotone(a in 0.0f64..20.0, b in 0.0f64..20.0) {
            if a < b { prop_assert!(kappa_limit(a) <= kappa_limit(b)); }
        }

        #[test]
        fn approx_balance_tracks_crossing(
            d12 in 0.5f64..5.0, d21 in 0.5f64..5.0, u in 0.0f64..1.0, v in 0.0f64..1.0
        ) {
            let m = 0.3 * d12.min(d21);
            let (delta1, delta2) = (u * m, v * m);
            let exact = exact_crossing(delta1, d21, delta2, d12).unwrap();
            prop_assert!((balance_approx(delta1, d21, delta2, d12) - exact).abs() <= 0.03);
        }

        #[test]
        fn fit_respects_box(ys in prop::collection::vec(0.0f64..4.0, 6)) {
            let xs = [0.2, 0.3, 0.4, 0.6, 0.7, 0.8];
            let p: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
            let fit = fit_rate_lines(&p, &p, None).unwrap();
            prop_assert!(fit.delta1 >= 0.0 && fit.delta1 <= fit.d21_fit);
            prop_assert!(fit.delta2 >= 0.0 && fit.delta2 <= fit.d12_fit);
        }
    }
}
