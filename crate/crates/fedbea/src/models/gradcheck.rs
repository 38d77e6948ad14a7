//! Finite-difference derivative checks.
//!
//! These are the independent oracles against which the analytic gradients and
//! Hessian-vector products are validated; they touch only `loss` (for the
//! gradient check) and `grad` (for the HVP check), never the code path under
//! test.

use crate::error::Result;
use crate::models::Objective;
use crate::param::ParamVector;

/// Central-difference step: `eps^(1/3) * max(1, ||w||_inf)`.
pub fn default_step(w: &ParamVector) -> f64 {
    f64::EPSILON.cbrt() * w.norm_inf().max(1.0)
}

/// Gradient via central differences of the loss.
pub fn central_diff_grad<O: Objective>(
    obj: &O,
    batch: &O::Batch,
    w: &ParamVector,
    step: Option<f64>,
) -> Result<ParamVector> {
    let h = step.unwrap_or_else(|| default_step(w));
    let mut g = ParamVector::zeros(w.dim());
    for i in 0..w.dim() {
        let mut plus = w.clone();
        plus[i] += h;
        let mut minus = w.clone();
        minus[i] -= h;
        g[i] = (obj.loss(batch, &plus)? - obj.loss(batch, &minus)?) / (2.0 * h);
    }
    Ok(g)
}

/// Hessian-vector product via central differences of the gradient:
/// `(grad(w + h v) − grad(w − h v)) / (2h)`.
pub fn central_diff_hvp<O: Objective>(
    obj: &O,
    batch: &O::Batch,
    w: &ParamVector,
    v: &ParamVector,
    step: Option<f64>,
) -> Result<ParamVector> {
    let h = step.unwrap_or_else(|| default_step(w) / v.norm_inf().max(1.0));
    let plus = obj.grad(batch, &w.axpy(h, v))?;
    let minus = obj.grad(batch, &w.axpy(-h, v))?;
    Ok(plus.sub(&minus).scale(1.0 / (2.0 * h)))
}

/// `||a − b|| / max(||a||, ||b||, floor)`.
pub fn relative_error(a: &ParamVector, b: &ParamVector) -> f64 {
    let scale = a.norm_l2().max(b.norm_l2()).max(1e-12);
    a.distance(b) / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BatchId, QuadraticBatch, QuadraticObjective};
    use crate::param::SquareMatrix;

    #[test]
    fn central_diff_recovers_affine_gradient() {
        let obj = QuadraticObjective::new(2);
        let batch = QuadraticBatch::new(
            BatchId {
                client: 0,
                index: 0,
            },
            SquareMatrix::from_diag(&[2.0, 0.5]),
            ParamVector::new(vec![1.0, -1.0]),
        );
        let w = ParamVector::new(vec![3.0, 2.0]);
        let fd = central_diff_grad(&obj, &batch, &w, None).unwrap();
        let exact = obj.grad(&batch, &w).unwrap();
        assert!(relative_error(&fd, &exact) < 1e-9);
    }
}
