//! Least-squares straight line parameterised by its end values,
//! `y(f) = start·(1 - f) + end·f`, under the ordering constraint
//! `0 ≤ start ≤ end` (increasing) or `0 ≤ end ≤ start` (decreasing).
//!
//! The problem is a two-variable convex QP; the optimum is the best feasible
//! candidate among the unconstrained solution and the solutions restricted to
//! each face of the feasible cone.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotone {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    /// Value at f = 0.
    pub start: f64,
    /// Value at f = 1.
    pub end: f64,
    /// Standard errors from the unconstrained regression covariance.
    pub se_start: f64,
    pub se_end: f64,
    pub residual_ss: f64,
    pub points: usize,
    /// True when a constraint is active at the optimum.
    pub constrained: bool,
}

impl LineFit {
    pub fn eval(&self, f: f64) -> f64 {
        self.start * (1.0 - f) + self.end * f
    }
}

struct Sums {
    uu: f64,
    uv: f64,
    vv: f64,
    uy: f64,
    vy: f64,
    n: usize,
}

fn sums(xs: &[f64], ys: &[f64]) -> Sums {
    let mut s = Sums {
        uu: 0.0,
        uv: 0.0,
        vv: 0.0,
        uy: 0.0,
        vy: 0.0,
        n: xs.len(),
    };
    for (&f, &y) in xs.iter().zip(ys) {
        let (u, v) = (1.0 - f, f);
        s.uu += u * u;
        s.uv += u * v;
        s.vv += v * v;
        s.uy += u * y;
        s.vy += v * y;
    }
    s
}

fn sse(xs: &[f64], ys: &[f64], start: f64, end: f64) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&f, &y)| {
            let r = y - (start * (1.0 - f) + end * f);
            r * r
        })
        .sum()
}

// Increasing case: 0 ≤ start ≤ end.
fn fit_increasing(xs: &[f64], ys: &[f64]) -> LineFit {
    let s = sums(xs, ys);
    let det = s.uu * s.vv - s.uv * s.uv;
    let unconstrained = if det.abs() > 1e-14 * (s.uu * s.vv).max(f64::MIN_POSITIVE) {
        Some((
            (s.vv * s.uy - s.uv * s.vy) / det,
            (s.uu * s.vy - s.uv * s.uy) / det,
        ))
    } else {
        None
    };

    let mut candidates: Vec<(f64, f64, bool)> = Vec::with_capacity(4);
    if let Some((a, b)) = unconstrained {
        candidates.push((a, b, false));
    }
    // start = 0
    if s.vv > 0.0 {
        candidates.push((0.0, s.vy / s.vv, true));
    }
    // start = end (constant line)
    let c = ys.iter().sum::<f64>() / ys.len().max(1) as f64;
    candidates.push((c, c, true));
    candidates.push((0.0, 0.0, true));

    let tol = 1e-12;
    let (start, end, constrained) = candidates
        .into_iter()
        .filter(|&(a, b, _)| a >= -tol && b - a >= -tol)
        .map(|(a, b, c)| (a.max(0.0), b.max(a.max(0.0)), c))
        .min_by(|x, y| sse(xs, ys, x.0, x.1).total_cmp(&sse(xs, ys, y.0, y.1)))
        .expect("the origin is always feasible");

    let (se_start, se_end) = match unconstrained {
        Some((a, b)) if s.n > 2 => {
            let s2 = sse(xs, ys, a, b) / (s.n - 2) as f64;
            ((s2 * s.vv / det).sqrt(), (s2 * s.uu / det).sqrt())
        }
        _ => (f64::NAN, f64::NAN),
    };

    LineFit {
        start,
        end,
        se_start,
        se_end,
        residual_ss: sse(xs, ys, start, end),
        points: s.n,
        constrained,
    }
}

/// Fits `ys` against `xs` (class fractions in [0, 1]).
pub fn fit_line(xs: &[f64], ys: &[f64], shape: Monotone) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    match shape {
        Monotone::Increasing => fit_increasing(xs, ys),
        Monotone::Decreasing => {
            let mirrored: Vec<f64> = xs.iter().map(|f| 1.0 - f).collect();
            let m = fit_increasing(&mirrored, ys);
            LineFit {
                start: m.end,
                end: m.start,
                se_start: m.se_end,
                se_end: m.se_start,
                ..m
            }
        }
    }
}
