//! Per-batch quadratic objectives: `L(w) = ½ (w − μ)ᵀ A (w − μ)`.
//!
//! Gradients are affine and Hessians constant, so every derivative is exact
//! to machine precision. The verification oracles lean on this: all
//! second-order identities that hold in exact arithmetic can be asserted at
//! 1e-12 on quadratic suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::models::{check_dim, BatchId, Objective};
use crate::param::{ParamVector, SquareMatrix, MAX_DENSE_DIM};

/// One quadratic mini-batch: a symmetric PSD curvature and a center.
#[derive(Clone, Debug)]
pub struct QuadraticBatch {
    pub id: BatchId,
    pub matrix: SquareMatrix,
    pub center: ParamVector,
}

impl QuadraticBatch {
    pub fn new(id: BatchId, matrix: SquareMatrix, center: ParamVector) -> Self {
        QuadraticBatch { id, matrix, center }
    }

    /// 1-d convenience constructor.
    pub fn scalar(id: BatchId, curvature: f64, center: f64) -> Self {
        QuadraticBatch {
            id,
            matrix: SquareMatrix::from_diag(&[curvature]),
            center: ParamVector::new(vec![center]),
        }
    }
}

/// The quadratic family; batch data carries all structure.
#[derive(Clone, Copy, Debug)]
pub struct QuadraticObjective {
    dimension: usize,
}

impl QuadraticObjective {
    pub fn new(dimension: usize) -> Self {
        QuadraticObjective { dimension }
    }
}

impl Objective for QuadraticObjective {
    type Batch = QuadraticBatch;

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn loss(&self, batch: &QuadraticBatch, w: &ParamVector) -> Result<f64> {
        check_dim(self, w)?;
        check_batch(self, batch)?;
        let r = w.sub(&batch.center);
        Ok(0.5 * r.dot(&batch.matrix.matvec(&r)))
    }

    fn grad(&self, batch: &QuadraticBatch, w: &ParamVector) -> Result<ParamVector> {
        check_dim(self, w)?;
        check_batch(self, batch)?;
        Ok(batch.matrix.matvec(&w.sub(&batch.center)))
    }

    fn hvp(&self, batch: &QuadraticBatch, w: &ParamVector, v: &ParamVector) -> Result<ParamVector> {
        check_dim(self, w)?;
        check_dim(self, v)?;
        check_batch(self, batch)?;
        Ok(batch.matrix.matvec(v))
    }

    fn full_hessian(&self, batch: &QuadraticBatch, w: &ParamVector) -> Result<SquareMatrix> {
        check_dim(self, w)?;
        check_batch(self, batch)?;
        if self.dimension > MAX_DENSE_DIM {
            return Err(Error::Capability(format!(
                "dense Hessian limited to dimension {MAX_DENSE_DIM}, got {}",
                self.dimension
            )));
        }
        Ok(batch.matrix.clone())
    }
}

fn check_batch(obj: &QuadraticObjective, batch: &QuadraticBatch) -> Result<()> {
    if batch.center.dim() != obj.dimension || batch.matrix.dim() != obj.dimension {
        return Err(Error::Dimension(format!(
            "quadratic batch of dimension {} under an objective of dimension {}",
            batch.center.dim(),
            obj.dimension
        )));
    }
    Ok(())
}

/// Random orthogonal matrix columns via twice-applied modified Gram-Schmidt
/// on a Gaussian sample.
pub(crate) fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    for _pass in 0..2 {
        for i in 0..n {
            for j in 0..i {
                let proj: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                let prev = cols[j].clone();
                for (a, b) in cols[i].iter_mut().zip(&prev) {
                    *a -= proj * b;
                }
            }
            let norm: f64 = cols[i].iter().map(|a| a * a).sum::<f64>().sqrt();
            for a in &mut cols[i] {
                *a /= norm;
            }
        }
    }
    cols
}

/// Symmetric PSD matrix with eigenvalues drawn uniformly from
/// `[lambda_min, lambda_max]`.
pub fn random_psd_matrix(
    n: usize,
    lambda_min: f64,
    lambda_max: f64,
    rng: &mut ChaCha8Rng,
) -> SquareMatrix {
    let q = random_orthogonal(n, rng);
    let eigenvalues: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(lambda_min..=lambda_max))
        .collect();
    SquareMatrix::from_eigen(&q, &eigenvalues)
}
