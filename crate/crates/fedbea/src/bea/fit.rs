//! Log-log residual order fitting.

use serde::Serialize;

use crate::error::{Error, Result};

/// Result of a residual order fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "exponent", rename_all = "snake_case")]
pub enum FitOutcome {
    /// Some gap sits at the floating-point floor: the identity is exact.
    Exact,
    /// Least-squares slope of `log(gap)` against `log(eta)`.
    Exponent(f64),
}

/// Gaps below this are treated as exact rather than fitted.
const EXACT_FLOOR: f64 = 1e-14;

/// Least-squares slope of `log(gap)` vs `log(eta)` over `(eta, gap)` points.
pub fn residual_order_fit(points: &[(f64, f64)]) -> Result<FitOutcome> {
    if points.len() < 2 {
        return Err(Error::Domain(
            "order fit needs at least two (eta, gap) points".into(),
        ));
    }
    for &(eta, gap) in points {
        if eta <= 0.0 {
            return Err(Error::Domain(format!("eta must be positive, got {eta}")));
        }
        if gap < 0.0 {
            return Err(Error::Domain(format!(
                "gap must be non-negative, got {gap}"
            )));
        }
    }
    if points.iter().any(|&(_, gap)| gap <= EXACT_FLOOR) {
        return Ok(FitOutcome::Exact);
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(eta, gap) in points {
        let x = eta.ln();
        let y = gap.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(FitOutcome::Exponent(slope))
}
