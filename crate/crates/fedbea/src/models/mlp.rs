//! One-hidden-layer tanh network with a softmax cross-entropy head.
//!
//! tanh keeps the loss twice differentiable everywhere, which the
//! second-order machinery requires. The gradient is plain reverse mode; the
//! Hessian-vector product propagates a tangent through both the forward and
//! the backward pass (forward-over-reverse), so it is exact rather than a
//! finite difference.

use rand::Rng;

use crate::error::{Error, Result};
use crate::models::{check_dim, log_sum_exp, softmax, LabeledBatch, Objective};
use crate::param::{ParamVector, SquareMatrix, MAX_DENSE_DIM};
use crate::rng::{domain, stream};

#[derive(Clone, Copy, Debug)]
pub struct SmoothMlp {
    features: usize,
    hidden: usize,
    classes: usize,
}

/// Offsets of the four parameter blocks inside the flat vector.
struct Layout {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    total: usize,
}

impl SmoothMlp {
    pub fn new(features: usize, hidden: usize, classes: usize) -> Self {
        SmoothMlp {
            features,
            hidden,
            classes,
        }
    }

    fn layout(&self) -> Layout {
        let w1 = 0;
        let b1 = w1 + self.hidden * self.features;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.classes * self.hidden;
        Layout {
            w1,
            b1,
            w2,
            b2,
            total: b2 + self.classes,
        }
    }

    /// Small deterministic init, scaled by fan-in.
    pub fn init_params(&self, seed: u64) -> ParamVector {
        let lay = self.layout();
        let mut rng = stream(
            seed,
            domain::INIT_PARAMS,
            &[self.features as u64, self.hidden as u64],
        );
        let mut w = vec![0.0; lay.total];
        let s1 = 1.0 / (self.features as f64).sqrt();
        let s2 = 1.0 / (self.hidden as f64).sqrt();
        for v in &mut w[lay.w1..lay.b1] {
            *v = rng.gen_range(-s1..s1);
        }
        for v in &mut w[lay.w2..lay.b2] {
            *v = rng.gen_range(-s2..s2);
        }
        ParamVector::new(w)
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

    /// Forward pass for one example; returns (hidden activations, logits).
    fn forward(&self, w: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let lay = self.layout();
        let a1: Vec<f64> = (0..self.hidden)
            .map(|i| {
                let row = &w[lay.w1 + i * self.features..lay.w1 + (i + 1) * self.features];
                let z: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[lay.b1 + i];
                z.tanh()
            })
            .collect();
        let z2: Vec<f64> = (0..self.classes)
            .map(|o| {
                let row = &w[lay.w2 + o * self.hidden..lay.w2 + (o + 1) * self.hidden];
                row.iter().zip(&a1).map(|(a, b)| a * b).sum::<f64>() + w[lay.b2 + o]
            })
            .collect();
        (a1, z2)
    }

    pub fn accuracy(&self, batch: &LabeledBatch, w: &ParamVector) -> Result<f64> {
        check_dim(self, w)?;
        self.check_batch(batch)?;
        let mut correct = 0usize;
        for (x, &y) in batch.inputs.iter().zip(&batch.labels) {
            let (_, z2) = self.forward(w.as_slice(), x);
            let pred = z2
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

impl Objective for SmoothMlp {
    type Batch = LabeledBatch;

    fn dimension(&self) -> usize {
        self.layout().total
    }

    fn loss(&self, batch: &LabeledBatch, w: &ParamVector) -> Result<f64> {
        check_dim(self, w)?;
        self.check_batch(batch)?;
        let mut acc = 0.0;
        for (x, &y) in batch.inputs.iter().zip(&batch.labels) {
            let (_, z2) = self.forward(w.as_slice(), x);
            acc += log_sum_exp(&z2) - z2[y];
        }
        Ok(acc / batch.len() as f64)
    }

    fn grad(&self, batch: &LabeledBatch, w: &ParamVector) -> Result<ParamVector> {
        check_dim(self, w)?;
        self.check_batch(batch)?;
        let lay = self.layout();
        let ws = w.as_slice();
        let mut g = vec![0.0; lay.total];
        let inv_b = 1.0 / batch.len() as f64;
        for (x, &y) in batch.inputs.iter().zip(&batch.labels) {
            let (a1, z2) = self.forward(ws, x);
            let p = softmax(&z2);
            // d loss / d logits
            let g2: Vec<f64> = (0..self.classes)
                .map(|o| (p[o] - if o == y { 1.0 } else { 0.0 }) * inv_b)
                .collect();
            for o in 0..self.classes {
                g[lay.b2 + o] += g2[o];
                for i in 0..self.hidden {
                    g[lay.w2 + o * self.hidden + i] += g2[o] * a1[i];
                }
            }
            for i in 0..self.hidden {
                let ga1: f64 = (0..self.classes)
                    .map(|o| ws[lay.w2 + o * self.hidden + i] * g2[o])
                    .sum();
                let gz1 = ga1 * (1.0 - a1[i] * a1[i]);
                g[lay.b1 + i] += gz1;
                for (f, &xf) in x.iter().enumerate() {
                    g[lay.w1 + i * self.features + f] += gz1 * xf;
                }
            }
        }
        Ok(ParamVector::new(g))
    }

    fn hvp(&self, batch: &LabeledBatch, w: &ParamVector, v: &ParamVector) -> Result<ParamVector> {
        check_dim(self, w)?;
        check_dim(self, v)?;
        self.check_batch(batch)?;
        let lay = self.layout();
        let ws = w.as_slice();
        let vs = v.as_slice();
        let mut out = vec![0.0; lay.total];
        let inv_b = 1.0 / batch.len() as f64;
        for (x, &y) in batch.inputs.iter().zip(&batch.labels) {
            let (a1, z2) = self.forward(ws, x);
            let p = softmax(&z2);
            let g2: Vec<f64> = (0..self.classes)
                .map(|o| p[o] - if o == y { 1.0 } else { 0.0 })
                .collect();

            // tangent of the forward pass along v
            let z1_dot: Vec<f64> = (0..self.hidden)
                .map(|i| {
                    let row = &vs[lay.w1 + i * self.features..lay.w1 + (i + 1) * self.features];
                    row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + vs[lay.b1 + i]
                })
                .collect();
            let a1_dot: Vec<f64> = (0..self.hidden)
                .map(|i| (1.0 - a1[i] * a1[i]) * z1_dot[i])
                .collect();
            let z2_dot: Vec<f64> = (0..self.classes)
                .map(|o| {
                    let vrow = &vs[lay.w2 + o * self.hidden..lay.w2 + (o + 1) * self.hidden];
                    let wrow = &ws[lay.w2 + o * self.hidden..lay.w2 + (o + 1) * self.hidden];
                    vrow.iter().zip(&a1).map(|(a, b)| a * b).sum::<f64>()
                        + wrow.iter().zip(&a1_dot).map(|(a, b)| a * b).sum::<f64>()
                        + vs[lay.b2 + o]
                })
                .collect();
            let s_dot: f64 = p.iter().zip(&z2_dot).map(|(a, b)| a * b).sum();
            let g2_dot: Vec<f64> = (0..self.classes)
                .map(|o| p[o] * (z2_dot[o] - s_dot))
                .collect();

            // tangent of the backward pass
            for o in 0..self.classes {
                out[lay.b2 + o] += g2_dot[o] * inv_b;
                for i in 0..self.hidden {
                    out[lay.w2 + o * self.hidden + i] +=
                        (g2_dot[o] * a1[i] + g2[o] * a1_dot[i]) * inv_b;
                }
            }
            for i in 0..self.hidden {
                let ga1: f64 = (0..self.classes)
                    .map(|o| ws[lay.w2 + o * self.hidden + i] * g2[o])
                    .sum();
                let ga1_dot: f64 = (0..self.classes)
                    .map(|o| {
                        vs[lay.w2 + o * self.hidden + i] * g2[o]
                            + ws[lay.w2 + o * self.hidden + i] * g2_dot[o]
                    })
                    .sum();
                let sech2 = 1.0 - a1[i] * a1[i];
                let gz1_dot = ga1_dot * sech2 + ga1 * (-2.0 * a1[i] * a1_dot[i]);
                out[lay.b1 + i] += gz1_dot * inv_b;
                for (f, &xf) in x.iter().enumerate() {
                    out[lay.w1 + i * self.features + f] += gz1_dot * xf * inv_b;
                }
            }
        }
        Ok(ParamVector::new(out))
    }

    /// Dense Hessian assembled column-by-column from the exact HVP.
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
        for j in 0..d {
            let mut e = ParamVector::zeros(d);
            e[j] = 1.0;
            let col = self.hvp(batch, w, &e)?;
            for i in 0..d {
                h.set(i, j, col[i]);
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::BatchId;

    fn tiny_batch() -> LabeledBatch {
        LabeledBatch {
            id: BatchId {
                client: 0,
                index: 0,
            },
            inputs: vec![vec![0.8, -0.3], vec![-0.5, 1.1], vec![0.1, 0.4]],
            labels: vec![0, 1, 1],
        }
    }

    #[test]
    fn dimension_counts_all_blocks() {
        let mlp = SmoothMlp::new(2, 3, 2);
        // 6 + 3 + 6 + 2
        assert_eq!(mlp.dimension(), 17);
    }

    #[test]
    fn init_is_deterministic() {
        let mlp = SmoothMlp::new(2, 3, 2);
        assert_eq!(mlp.init_params(5), mlp.init_params(5));
        assert_ne!(mlp.init_params(5), mlp.init_params(6));
    }

    #[test]
    fn hessian_assembled_from_hvp_is_symmetric() {
        // Columns come from independent HVP calls, so symmetry is a real
        // check of the tangent propagation.
        let mlp = SmoothMlp::new(2, 3, 2);
        let w = mlp.init_params(11);
        let h = mlp.full_hessian(&tiny_batch(), &w).unwrap();
        assert!(h.asymmetry() <= 1e-10, "asymmetry {}", h.asymmetry());
    }

    #[test]
    fn loss_drops_along_negative_gradient() {
        let mlp = SmoothMlp::new(2, 3, 2);
        let w = mlp.init_params(3);
        let batch = tiny_batch();
        let l0 = mlp.loss(&batch, &w).unwrap();
        let g = mlp.grad(&batch, &w).unwrap();
        let w1 = w.axpy(-0.05, &g);
        let l1 = mlp.loss(&batch, &w1).unwrap();
        assert!(l1 < l0);
    }
}
