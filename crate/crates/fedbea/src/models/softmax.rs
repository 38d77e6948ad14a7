//! Multinomial logistic regression with a flattened `classes x features`
//! weight matrix and mean cross-entropy loss.
//!
//! The dense Hessian has the closed form
//! `H[(c,f),(c',f')] = mean_i (p_c δ_cc' − p_c p_c') x_f x_f'`,
//! assembled directly (not via HVP columns) so the two paths cross-check
//! each other in tests.

use crate::error::{Error, Result};
use crate::models::{check_dim, log_sum_exp, softmax, LabeledBatch, Objective};
use crate::param::{ParamVector, SquareMatrix, MAX_DENSE_DIM};

#[derive(Clone, Copy, Debug)]
pub struct SoftmaxLinear {
    classes: usize,
    features: usize,
}

impl SoftmaxLinear {
    pub fn new(classes: usize, features: usize) -> Self {
        SoftmaxLinear { classes, features }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn features(&self) -> usize {
        self.features
    }

    fn logits(&self, w: &ParamVector, x: &[f64]) -> Vec<f64> {
        (0..self.classes)
            .map(|c| {
                let row = &w.as_slice()[c * self.features..(c + 1) * self.features];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    fn check_batch(&self, batch: &LabeledBatch) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::Domain("empty mini-batch".into()));
        }
        for x in &batch.inputs {
            if x.len() != self.features {
                return Err(Error::Dimension(format!(
                    "example has {} features, objective expects {}",
                    x.len(),
                    self.features
                )));
            }
        }
        for &y in &batch.labels {
            if y >= self.classes {
                return Err(Error::Domain(format!(
                    "label {y} out of range for {} classes",
                    self.classes
                )));
            }
        }
        Ok(())
    }

    pub fn accuracy(&self, batch: &LabeledBatch, w: &ParamVector) -> Result<f64> {
        check_dim(self, w)?;
        self.check_batch(batch)?;
        let mut correct = 0usize;
        for (x, &y) in batch.inputs.iter().zip(&batch.labels) {
            let z = self.logits(w, x);
            let pred = z
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            if pred == y {
                correct += 1;
            }
        }
        Ok(correct as f64 / batch.len() as f64)
    }
}

impl Objective for SoftmaxLinear {
    type Batch = LabeledBatch;

    fn dimension(&self) -> usize {
        self.classes * self.features
    }

    fn loss(&self, batch: &LabeledBatch, w: &ParamVector) -> Result<f64> {
        check_dim(self, w)?;
        self.check_batch(batch)?;
        let mut acc = 0.0;
        for (x, &y) in batch.inputs.iter().zip(&batch.labels) {
            let z = self.logits(w, x);
            acc += log_sum_exp(&z) - z[y];
        }
        Ok(acc / batch.len() as f64)
    }

    fn grad(&self, batch: &LabeledBatch, w: &ParamVector) -> Result<ParamVector> {
        check_dim(self, w)?;
        self.check_batch(batch)?;
        let mut g = ParamVector::zeros(self.dimension());
        let inv_b = 1.0 / batch.len() as f64;
        for (x, &y) in batch.inputs.iter().zip(&batch.labels) {
            let p = softmax(&self.logits(w, x));
            for c in 0..self.classes {
                let coeff = (p[c] - if c == y { 1.0 } else { 0.0 }) * inv_b;
                for (f, &xf) in x.iter().enumerate() {
                    g[c * self.features + f] += coeff * xf;
                }
            }
        }
        Ok(g)
    }

    fn hvp(&self, batch: &LabeledBatch, w: &ParamVector, v: &ParamVector) -> Result<ParamVector> {
        check_dim(self, w)?;
        check_dim(self, v)?;
        self.check_batch(batch)?;
        let mut out = ParamVector::zeros(self.dimension());
        let inv_b = 1.0 / batch.len() as f64;
        for x in &batch.inputs {
            let p = softmax(&self.logits(w, x));
            // u = V x per class, then (diag(p) − p pᵀ) u
            let u: Vec<f64> = (0..self.classes)
                .map(|c| {
                    let row = &v.as_slice()[c * self.features..(c + 1) * self.features];
                    row.iter().zip(x).map(|(a, b)| a * b).sum()
                })
                .collect();
            let s: f64 = p.iter().zip(&u).map(|(a, b)| a * b).sum();
            for c in 0..self.classes {
                let t = p[c] * (u[c] - s) * inv_b;
                for (f, &xf) in x.iter().enumerate() {
                    out[c * self.features + f] += t * xf;
                }
            }
        }
        Ok(out)
    }

    fn full_hessian(&self, batch: &LabeledBatch, w: &ParamVector) -> Result<SquareMatrix> {
        check_dim(self, w)?;
        self.check_batch(batch)?;
        let d = self.dimension();
        if d > MAX_DENSE_DIM {
            return Err(Error::Capability(format!(
                "dense Hessian limited to dimension {MAX_DENSE_DIM}, got {d}"
            )));
        }
        let mut h = SquareMatrix::zeros(d);
        let inv_b = 1.0 / batch.len() as f64;
        for x in &batch.inputs {
            let p = softmax(&self.logits(w, x));
            for c in 0..self.classes {
                for c2 in 0..self.classes {
                    let m = p[c] * (if c == c2 { 1.0 } else { 0.0 } - p[c2]) * inv_b;
                    if m == 0.0 {
                        continue;
                    }
                    for (f, &xf) in x.iter().enumerate() {
                        for (f2, &xf2) in x.iter().enumerate() {
                            h.add_at(c * self.features + f, c2 * self.features + f2, m * xf * xf2);
                        }
                    }
                }
            }
        }
        Ok(h)
    }
}
