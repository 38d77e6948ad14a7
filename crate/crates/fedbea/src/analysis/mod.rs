//! Training diagnostics: gradient variances and Hessian-spectrum estimates.

mod spectrum;

pub use spectrum::{
    fisher_trace_estimate, hessian_exact_trace, max_eigenvalue_power_iteration,
    max_eigenvalue_power_iteration_seeded, power_iteration_with, SpectrumEstimate,
};

use serde::Serialize;

use crate::bea;
use crate::data::ClientData;
use crate::error::Result;
use crate::models::Objective;
use crate::param::ParamVector;

/// Gradient-variance diagnostics at one round boundary.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VarianceReport {
    pub client_grad_variance: f64,
    pub batch_grad_variance: f64,
    pub evaluated_at_round: u64,
}

/// Variance of the client gradients around the global gradient. Identical to
/// the dispersion term by definition; this alias shares its code path
/// bit-for-bit.
pub fn client_gradient_variance<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
) -> Result<f64> {
    bea::dispersion_term(obj, clients, w)
}

/// Variance of the mini-batch gradients around their client means.
pub fn batch_gradient_variance<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
) -> Result<f64> {
    bea::batch_deviation_term(obj, clients, w)
}

/// Both variances at once.
pub fn variance_report<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
    round: u64,
) -> Result<VarianceReport> {
    Ok(VarianceReport {
        client_grad_variance: client_gradient_variance(obj, clients, w)?,
        batch_grad_variance: batch_gradient_variance(obj, clients, w)?,
        evaluated_at_round: round,
    })
}
