//! Golden-section search for the maximum of a unimodal function.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximises `f` on `[a, b]` to an abscissa tolerance `tol`, returning
/// `(argmax, max)`. The objective may fail; its error is propagated.
pub fn maximize<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a < b) || !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "golden section needs a < b and tol > 0 (got [{a}, {b}], tol {tol})"
        )));
    }
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x)?;
    Ok((x, fx))
}
