//! Hessian-spectrum estimates: exact trace (small `d`), per-sample
//! gradient-variance approximation of the trace, and power-iteration extreme
//! eigenvalue via Hessian-vector products.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{mean_full_hessian, mean_hvp, Objective};
use crate::param::{ParamVector, MAX_DENSE_DIM};
use crate::rng::{domain, stream};

const POWER_ITERATION_SEED: u64 = 0x5EED;

/// Spectrum summary at one parameter point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectrumEstimate {
    pub max_eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
    pub fisher_trace: Option<f64>,
    pub exact_trace: Option<f64>,
}

/// Per-sample gradient-variance estimate of `tr(∇∇L)`:
/// `(1/N) Σ_i ||∇L_i(w) − ∇L(w)||²` over sample units (normally one example
/// each).
///
/// The approximation is meaningful for maximum-likelihood losses near an
/// optimum, where the Hessian is close to the Fisher information matrix; it
/// carries no such meaning for quadratics.
pub fn fisher_trace_estimate<O: Objective>(
    obj: &O,
    sample_units: &[O::Batch],
    w: &ParamVector,
) -> Result<f64> {
    if sample_units.is_empty() {
        return Err(Error::Domain("fisher estimate over an empty sample".into()));
    }
    let per_unit: Vec<ParamVector> = sample_units
        .iter()
        .map(|b| obj.grad(b, w))
        .collect::<Result<_>>()?;
    let mean = ParamVector::mean(&per_unit)?;
    let mut acc = 0.0;
    for g in &per_unit {
        acc += g.sub(&mean).norm_sq();
    }
    Ok(acc / per_unit.len() as f64)
}

/// Trace of the batch-averaged dense Hessian (`d <= 64`).
pub fn hessian_exact_trace<O: Objective>(
    obj: &O,
    batches: &[O::Batch],
    w: &ParamVector,
) -> Result<f64> {
    if w.dim() > MAX_DENSE_DIM {
        return Err(Error::Capability(format!(
            "exact trace limited to dimension {MAX_DENSE_DIM}, got {}",
            w.dim()
        )));
    }
    Ok(mean_full_hessian(obj, batches, w)?.trace())
}

/// Power iteration for the extreme eigenvalue of the batch-averaged Hessian,
/// with a fixed seeded start vector.
pub fn max_eigenvalue_power_iteration<O: Objective>(
    obj: &O,
    batches: &[O::Batch],
    w: &ParamVector,
    max_iters: usize,
    tol: f64,
) -> Result<SpectrumEstimate> {
    max_eigenvalue_power_iteration_seeded(obj, batches, w, max_iters, tol, POWER_ITERATION_SEED)
}

/// Power iteration with an explicit start-vector seed. The estimate is
/// insensitive to the seed whenever the spectral gap is reasonable.
pub fn max_eigenvalue_power_iteration_seeded<O: Objective>(
    obj: &O,
    batches: &[O::Batch],
    w: &ParamVector,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> Result<SpectrumEstimate> {
    power_iteration_with(
        |v| mean_hvp(obj, batches, w, v),
        w.dim(),
        max_iters,
        tol,
        seed,
    )
}

/// Power iteration against any linear operator given as a closure.
pub fn power_iteration_with<F>(
    apply: F,
    d: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> Result<SpectrumEstimate>
where
    F: Fn(&ParamVector) -> Result<ParamVector>,
{
    if max_iters == 0 {
        return Err(Error::Domain("power iteration needs max_iters >= 1".into()));
    }
    if tol <= 0.0 {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut rng = stream(seed, domain::POWER_ITERATION, &[d as u64]);
    let mut v = ParamVector::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let norm = v.norm_l2();
    v.scale_mut(1.0 / norm);

    let mut lambda = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iters {
        iterations = it;
        let hv = apply(&v)?;
        let rayleigh = v.dot(&hv);
        let hv_norm = hv.norm_l2();
        if hv_norm == 0.0 {
            // v is in the kernel; the operator is zero along this start
            lambda = 0.0;
            converged = true;
            break;
        }
        let next = hv.scale(1.0 / hv_norm);
        if it > 1 && (rayleigh - lambda).abs() <= tol * rayleigh.abs().max(f64::MIN_POSITIVE) {
            lambda = rayleigh;
            converged = true;
            break;
        }
        lambda = rayleigh;
        v = next;
    }
    Ok(SpectrumEstimate {
        max_eigenvalue: lambda,
        iterations,
        converged,
        fisher_trace: None,
        exact_trace: None,
    })
}
