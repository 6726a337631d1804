//! Browser bindings. Every function returns a JSON string so the page needs
//! no generated TypeScript types; errors come back as `{"error": "..."}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use kappabound::analytic::{divergence_curve as curve, AnalyticModel};
use kappabound::confusion::{kappa_from_rates, rates, ConfusionCounts};
use kappabound::sweep::{balance_approx, exact_crossing, kappa_limit};

fn respond(result: kappabound::Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn model(family: &str, p1: f64, p2: f64, p3: f64, p4: f64, dim: usize) -> kappabound::Result<AnalyticModel> {
    let leaf = match family {
        "exponential" => AnalyticModel::exponential(p1, p2)?,
        _ => AnalyticModel::gaussian(p1, p2, p3, p4)?,
    };
    if dim <= 1 {
        Ok(leaf)
    } else {
        AnalyticModel::replicate(leaf, dim)
    }
}

/// Renyi and Chernoff profile of a reference model.
///
/// `family` is `"gaussian"` (`p1..p4` = mean1, sd1, mean2, sd2) or
/// `"exponential"` (`p1`, `p2` = the two scales, i.e. means).
#[wasm_bindgen]
pub fn divergence_curve(
    family: &str,
    p1: f64,
    p2: f64,
    p3: f64,
    p4: f64,
    dim: usize,
    points: usize,
) -> String {
    respond(
        model(family, p1, p2, p3, p4, dim)
            .and_then(|m| curve(&m, points))
            .map(|c| json!(c)),
    )
}

/// Predicted kappa against f1 from the two leakage lines, with the balance point.
#[wasm_bindgen]
pub fn kappa_curve(delta1: f64, d21: f64, delta2: f64, d12: f64, points: usize) -> String {
    let n = points.max(2);
    let rows: Vec<[f64; 4]> = (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            let k12 = delta1 * (1.0 - f) + d21 * f;
            let k21 = d12 * (1.0 - f) + delta2 * f;
            [f, k12, k21, kappa_from_rates(f, k12, k21)]
        })
        .collect();
    json!({
        "rows": rows,
        "f_b": balance_approx(delta1, d21, delta2, d12),
        "exact_crossing": exact_crossing(delta1, d21, delta2, d12),
    })
    .to_string()
}

/// Kappa and leakage rates of a 2x2 confusion matrix (rows are the true class),
/// compared with the limit for `cdr` bits when `cdr` is positive.
#[wasm_bindgen]
pub fn confusion_rates(n1_true: u32, n1_leak: u32, n2_leak: u32, n2_true: u32, cdr: f64) -> String {
    respond(
        ConfusionCounts::new(n1_true.into(), n1_leak.into(), n2_leak.into(), n2_true.into())
            .and_then(|c| rates(&c))
            .map(|r| {
                let limit = (cdr > 0.0).then(|| kappa_limit(cdr));
                json!({ "rates": r, "kappa_limit": limit })
            }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_curve_crosses_where_the_lines_meet() {
        let v: Value = serde_json::from_str(&kappa_curve(0.2, 2.0, 0.3, 1.5, 11)).unwrap();
        let x = v["exact_crossing"].as_f64().unwrap();
        assert!((x - 1.3 / 3.0).abs() < 1e-12);
        assert_eq!(v["rows"].as_array().unwrap().len(), 11);
    }

    #[test]
    fn errors_are_json() {
        let v: Value = serde_json::from_str(&confusion_rates(0, 0, 0, 0, 1.0)).unwrap();
        assert!(v["error"].is_string());
        let v: Value =
            serde_json::from_str(&divergence_curve("gaussian", 0.0, -1.0, 1.0, 1.0, 1, 11)).unwrap();
        assert!(v["error"].is_string());
    }

    #[test]
    fn exponential_profile_has_both_directions() {
        let v: Value =
            serde_json::from_str(&divergence_curve("exponential", 1.0, 2.392, 0.0, 0.0, 1, 21)).unwrap();
        assert!(v["d12"].as_f64().unwrap() > 0.0 && v["d21"].as_f64().unwrap() > v["d12"].as_f64().unwrap());
        assert_eq!(v["t_grid"].as_array().unwrap().len(), 21);
    }
}
