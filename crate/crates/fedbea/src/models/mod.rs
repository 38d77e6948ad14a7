//! Differentiable objective families.
//!
//! An [`Objective`] maps a mini-batch and a parameter vector to a loss with
//! analytic first and second derivatives. Three families are provided:
//!
//! * [`QuadraticObjective`]: per-batch quadratic bowls, exact to machine
//!   precision; the substrate for the brute-force verification oracles.
//! * [`SoftmaxLinear`]: multinomial logistic regression with a closed-form
//!   dense Hessian.
//! * [`SmoothMlp`]: one tanh hidden layer with a cross-entropy head; twice
//!   differentiable everywhere, with an exact forward-over-reverse
//!   Hessian-vector product.
//!
//! All evaluations are pure functions of their inputs and safe to call
//! concurrently.

mod mlp;
mod softmax;

pub mod gradcheck;
pub mod quadratic;

pub use mlp::SmoothMlp;
pub use quadratic::{QuadraticBatch, QuadraticObjective};
pub use softmax::SoftmaxLinear;

use crate::error::{Error, Result};
use crate::param::{ParamVector, SquareMatrix};

/// Identifies a mini-batch as (client, position within the client's epoch).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BatchId {
    pub client: usize,
    pub index: usize,
}

/// A labeled mini-batch for the dataset-backed objectives.
#[derive(Clone, Debug)]
pub struct LabeledBatch {
    pub id: BatchId,
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl LabeledBatch {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// A differentiable loss family evaluated per mini-batch.
pub trait Objective: Send + Sync {
    type Batch: Clone + Send + Sync;

    fn dimension(&self) -> usize;

    fn loss(&self, batch: &Self::Batch, w: &ParamVector) -> Result<f64>;

    fn grad(&self, batch: &Self::Batch, w: &ParamVector) -> Result<ParamVector>;

    /// Hessian-vector product `(∇∇L) v` at `w`.
    fn hvp(&self, batch: &Self::Batch, w: &ParamVector, v: &ParamVector) -> Result<ParamVector>;

    /// Dense Hessian; only available for `dimension() <= MAX_DENSE_DIM`.
    fn full_hessian(&self, batch: &Self::Batch, w: &ParamVector) -> Result<SquareMatrix>;
}

pub(crate) fn check_dim<O: Objective>(obj: &O, w: &ParamVector) -> Result<()> {
    if w.dim() != obj.dimension() {
        return Err(Error::Dimension(format!(
            "parameter has dimension {}, objective expects {}",
            w.dim(),
            obj.dimension()
        )));
    }
    Ok(())
}

fn non_empty<T>(items: &[T], what: &str) -> Result<()> {
    if items.is_empty() {
        return Err(Error::Domain(format!("{what} over an empty batch list")));
    }
    Ok(())
}

/// Mean loss over a batch list.
pub fn mean_loss<O: Objective>(obj: &O, batches: &[O::Batch], w: &ParamVector) -> Result<f64> {
    non_empty(batches, "mean loss")?;
    let mut acc = 0.0;
    for b in batches {
        acc += obj.loss(b, w)?;
    }
    Ok(acc / batches.len() as f64)
}

/// Mean gradient over a batch list.
pub fn mean_grad<O: Objective>(
    obj: &O,
    batches: &[O::Batch],
    w: &ParamVector,
) -> Result<ParamVector> {
    non_empty(batches, "mean gradient")?;
    let mut acc = ParamVector::zeros(obj.dimension());
    for b in batches {
        acc.axpy_mut(1.0, &obj.grad(b, w)?);
    }
    acc.scale_mut(1.0 / batches.len() as f64);
    Ok(acc)
}

/// Mean Hessian-vector product over a batch list.
pub fn mean_hvp<O: Objective>(
    obj: &O,
    batches: &[O::Batch],
    w: &ParamVector,
    v: &ParamVector,
) -> Result<ParamVector> {
    non_empty(batches, "mean hvp")?;
    let mut acc = ParamVector::zeros(obj.dimension());
    for b in batches {
        acc.axpy_mut(1.0, &obj.hvp(b, w, v)?);
    }
    acc.scale_mut(1.0 / batches.len() as f64);
    Ok(acc)
}

/// Mean dense Hessian over a batch list (`d <= 64`).
pub fn mean_full_hessian<O: Objective>(
    obj: &O,
    batches: &[O::Batch],
    w: &ParamVector,
) -> Result<SquareMatrix> {
    non_empty(batches, "mean hessian")?;
    let mut acc = SquareMatrix::zeros(obj.dimension());
    for b in batches {
        acc.add_scaled_mut(1.0, &obj.full_hessian(b, w)?);
    }
    acc.scale_mut(1.0 / batches.len() as f64);
    Ok(acc)
}

/// Finite-difference approximation of `∇ ½‖∇L(w)‖²`:
/// `(∇L(w + eps ∇L(w)) − ∇L(w)) / eps`.
///
/// On quadratics the difference quotient is exact and equals `hvp(w, ∇L(w))`
/// for any `eps > 0`.
pub fn grad_norm_penalty_gradient<O: Objective>(
    obj: &O,
    batch: &O::Batch,
    w: &ParamVector,
    eps: f64,
) -> Result<ParamVector> {
    if eps <= 0.0 {
        return Err(Error::Domain(format!(
            "gradient-norm penalty step must be positive, got {eps}"
        )));
    }
    let g = obj.grad(batch, w)?;
    let shifted = w.axpy(eps, &g);
    let g_shifted = obj.grad(batch, &shifted)?;
    Ok(g_shifted.sub(&g).scale(1.0 / eps))
}

/// Dataset-backed objective selected at configuration time.
#[derive(Clone, Debug)]
pub enum DatasetObjective {
    Softmax(SoftmaxLinear),
    Mlp(SmoothMlp),
}

impl Objective for DatasetObjective {
    type Batch = LabeledBatch;

    fn dimension(&self) -> usize {
        match self {
            DatasetObjective::Softmax(o) => o.dimension(),
            DatasetObjective::Mlp(o) => o.dimension(),
        }
    }

    fn loss(&self, batch: &LabeledBatch, w: &ParamVector) -> Result<f64> {
        match self {
            DatasetObjective::Softmax(o) => o.loss(batch, w),
            DatasetObjective::Mlp(o) => o.loss(batch, w),
        }
    }

    fn grad(&self, batch: &LabeledBatch, w: &ParamVector) -> Result<ParamVector> {
        match self {
            DatasetObjective::Softmax(o) => o.grad(batch, w),
            DatasetObjective::Mlp(o) => o.grad(batch, w),
        }
    }

    fn hvp(&self, batch: &LabeledBatch, w: &ParamVector, v: &ParamVector) -> Result<ParamVector> {
        match self {
            DatasetObjective::Softmax(o) => o.hvp(batch, w, v),
            DatasetObjective::Mlp(o) => o.hvp(batch, w, v),
        }
    }

    fn full_hessian(&self, batch: &LabeledBatch, w: &ParamVector) -> Result<SquareMatrix> {
        match self {
            DatasetObjective::Softmax(o) => o.full_hessian(batch, w),
            DatasetObjective::Mlp(o) => o.full_hessian(batch, w),
        }
    }
}

impl DatasetObjective {
    /// Fraction of examples whose argmax prediction matches the label.
    pub fn accuracy(&self, batch: &LabeledBatch, w: &ParamVector) -> Result<f64> {
        match self {
            DatasetObjective::Softmax(o) => o.accuracy(batch, w),
            DatasetObjective::Mlp(o) => o.accuracy(batch, w),
        }
    }

    /// Deterministic initial parameter for training runs.
    pub fn init_params(&self, seed: u64) -> ParamVector {
        match self {
            // Zero weights give the uniform prediction; a convenient, exactly
            // reproducible start for the convex softmax model.
            DatasetObjective::Softmax(o) => ParamVector::zeros(o.dimension()),
            DatasetObjective::Mlp(o) => o.init_params(seed),
        }
    }
}

/// Stable log-sum-exp.
pub(crate) fn log_sum_exp(logits: &[f64]) -> f64 {
    let m = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    m + logits.iter().map(|&z| (z - m).exp()).sum::<f64>().ln()
}

/// Softmax probabilities with max-subtraction.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
