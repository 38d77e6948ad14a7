//! Raw implicit-regularizer terms.
//!
//! Every term is reported unscaled; the report builders apply the
//! algorithm-specific coefficients. Gradients of squared norms are computed
//! exactly as `2 H v` via Hessian-vector products, never by finite
//! differences, so the verification targets carry no approximation error of
//! their own.

use crate::data::ClientData;
use crate::error::{Error, Result};
use crate::models::{mean_grad, mean_hvp, mean_loss, Objective};
use crate::param::ParamVector;

fn non_empty<B>(clients: &[ClientData<B>]) -> Result<()> {
    if clients.is_empty() {
        return Err(Error::Domain("term over an empty client set".into()));
    }
    Ok(())
}

/// `L(w)`: mean over clients of each client's mean batch loss.
pub fn global_loss<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
) -> Result<f64> {
    non_empty(clients)?;
    let mut acc = 0.0;
    for c in clients {
        acc += mean_loss(obj, &c.batches, w)?;
    }
    Ok(acc / clients.len() as f64)
}

/// `∇L(w)`: mean of the client gradients.
pub fn global_grad<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
) -> Result<ParamVector> {
    non_empty(clients)?;
    let per_client: Vec<ParamVector> = clients
        .iter()
        .map(|c| mean_grad(obj, &c.batches, w))
        .collect::<Result<_>>()?;
    ParamVector::mean(&per_client)
}

/// `(∇∇L(w)) v`: mean of the client Hessian-vector products.
pub fn global_hvp<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
    v: &ParamVector,
) -> Result<ParamVector> {
    non_empty(clients)?;
    let per_client: Vec<ParamVector> = clients
        .iter()
        .map(|c| mean_hvp(obj, &c.batches, w, v))
        .collect::<Result<_>>()?;
    ParamVector::mean(&per_client)
}

/// Dispersion term: `(1/m) Σ_j ||∇L(w) − ∇L_j(w)||²`, the variance of the
/// client gradients around the global gradient.
pub fn dispersion_term<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
) -> Result<f64> {
    non_empty(clients)?;
    let per_client: Vec<ParamVector> = clients
        .iter()
        .map(|c| mean_grad(obj, &c.batches, w))
        .collect::<Result<_>>()?;
    let global = ParamVector::mean(&per_client)?;
    let mut acc = 0.0;
    for g in &per_client {
        acc += global.sub(g).norm_sq();
    }
    Ok(acc / clients.len() as f64)
}

/// SGD term: `(1/(mE)) Σ_j Σ_k ||∇L_jk(w)||²`, the second moment of the
/// mini-batch gradients.
pub fn sgd_term<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
) -> Result<f64> {
    non_empty(clients)?;
    let mut acc = 0.0;
    for c in clients {
        let mut client_acc = 0.0;
        for b in &c.batches {
            client_acc += obj.grad(b, w)?.norm_sq();
        }
        acc += client_acc / c.batches.len() as f64;
    }
    Ok(acc / clients.len() as f64)
}

/// Within-client batch deviation: `(1/(mE)) Σ_j Σ_k ||∇L_j(w) − ∇L_jk(w)||²`.
/// This is both the batch-gradient variance diagnostic and the raw third
/// term of the FedSAM and SCAFFOLD modified losses.
pub fn batch_deviation_term<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
) -> Result<f64> {
    non_empty(clients)?;
    let mut acc = 0.0;
    for c in clients {
        let client_mean = mean_grad(obj, &c.batches, w)?;
        let mut client_acc = 0.0;
        for b in &c.batches {
            client_acc += client_mean.sub(&obj.grad(b, w)?).norm_sq();
        }
        acc += client_acc / c.batches.len() as f64;
    }
    Ok(acc / clients.len() as f64)
}

/// Transformed dispersion term: the dispersion evaluated at each client's
/// drifted point `w − (aKη/3) ∇L_j(w)` instead of at `w`.
pub fn transformed_dispersion_term<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
    local_epochs: usize,
    steps_per_epoch: usize,
    eta: f64,
) -> Result<f64> {
    non_empty(clients)?;
    let drift = (local_epochs * steps_per_epoch) as f64 * eta / 3.0;
    let mut acc = 0.0;
    for c in clients {
        let own_grad = mean_grad(obj, &c.batches, w)?;
        let shifted = w.axpy(-drift, &own_grad);
        let global_at_shifted = global_grad(obj, clients, &shifted)?;
        let own_at_shifted = mean_grad(obj, &c.batches, &shifted)?;
        acc += global_at_shifted.sub(&own_at_shifted).norm_sq();
    }
    Ok(acc / clients.len() as f64)
}

/// Secondary dispersion term: `(1/m) Σ_j ζ_jᵀ (∇∇L(w)) ζ_j` with
/// `ζ_j = ∇L(w) − ∇L_j(w)`. Non-negative whenever the global Hessian is
/// positive semi-definite.
pub fn secondary_dispersion_term<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
) -> Result<f64> {
    non_empty(clients)?;
    let per_client: Vec<ParamVector> = clients
        .iter()
        .map(|c| mean_grad(obj, &c.batches, w))
        .collect::<Result<_>>()?;
    let global = ParamVector::mean(&per_client)?;
    let mut acc = 0.0;
    for g in &per_client {
        let zeta = global.sub(g);
        let h_zeta = global_hvp(obj, clients, w, &zeta)?;
        acc += zeta.dot(&h_zeta);
    }
    Ok(acc / clients.len() as f64)
}

/// `∇ dispersion(w) = (2/m) Σ_j (H − H_j)(∇L − ∇L_j)`, exact via HVPs.
pub fn dispersion_gradient<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
) -> Result<ParamVector> {
    non_empty(clients)?;
    let per_client: Vec<ParamVector> = clients
        .iter()
        .map(|c| mean_grad(obj, &c.batches, w))
        .collect::<Result<_>>()?;
    let global = ParamVector::mean(&per_client)?;
    let mut acc = ParamVector::zeros(w.dim());
    for (c, g) in clients.iter().zip(&per_client) {
        let zeta = global.sub(g);
        acc.axpy_mut(2.0, &global_hvp(obj, clients, w, &zeta)?);
        acc.axpy_mut(-2.0, &mean_hvp(obj, &c.batches, w, &zeta)?);
    }
    acc.scale_mut(1.0 / clients.len() as f64);
    Ok(acc)
}

/// `∇ sgd_term(w) = (2/(mE)) Σ_j Σ_k H_jk ∇L_jk`, exact via HVPs.
pub fn sgd_term_gradient<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
) -> Result<ParamVector> {
    non_empty(clients)?;
    let mut acc = ParamVector::zeros(w.dim());
    for c in clients {
        let mut client_acc = ParamVector::zeros(w.dim());
        for b in &c.batches {
            let g = obj.grad(b, w)?;
            client_acc.axpy_mut(2.0, &obj.hvp(b, w, &g)?);
        }
        acc.axpy_mut(1.0 / c.batches.len() as f64, &client_acc);
    }
    acc.scale_mut(1.0 / clients.len() as f64);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{duplicate_client, synth_quadratic_tasks};
    use crate::models::{BatchId, QuadraticBatch, QuadraticObjective};

    fn scalar_clients(centers: &[f64]) -> (QuadraticObjective, Vec<ClientData<QuadraticBatch>>) {
        let clients = centers
            .iter()
            .enumerate()
            .map(|(j, &mu)| ClientData {
                client_id: j,
                batches: vec![QuadraticBatch::scalar(
                    BatchId {
                        client: j,
                        index: 0,
                    },
                    1.0,
                    mu,
                )],
            })
            .collect();
        (QuadraticObjective::new(1), clients)
    }

    #[test]
    fn dispersion_of_scalar_gradients() {
        // client gradients at w=0 are {1, 3} when centers are {-1, -3}:
        // global = 2, so the variance is ((2-1)^2 + (2-3)^2)/2 = 1
        let (obj, clients) = scalar_clients(&[-1.0, -3.0]);
        let w = ParamVector::zeros(1);
        assert_eq!(dispersion_term(&obj, &clients, &w).unwrap(), 1.0);
    }

    #[test]
    fn identical_clients_have_zero_dispersion() {
        let (obj, one) = synth_quadratic_tasks(1, 2, 3, 0.0, 2).unwrap();
        let clients = duplicate_client(&one[0], 4);
        let w = ParamVector::new(vec![1.0, -2.0, 0.5]);
        assert_eq!(dispersion_term(&obj, &clients, &w).unwrap(), 0.0);
        assert_eq!(secondary_dispersion_term(&obj, &clients, &w).unwrap(), 0.0);
    }

    #[test]
    fn dispersion_matches_two_pass_variance_oracle() {
        let (obj, clients) = synth_quadratic_tasks(6, 3, 4, 5.0, 33).unwrap();
        let w = ParamVector::zeros(4);
        let term = dispersion_term(&obj, &clients, &w).unwrap();
        // independent two-pass computation with reversed accumulation order
        let grads: Vec<ParamVector> = clients
            .iter()
            .map(|c| mean_grad(&obj, &c.batches, &w).unwrap())
            .collect();
        let mut mean = ParamVector::zeros(4);
        for g in grads.iter().rev() {
            mean.axpy_mut(1.0, g);
        }
        mean.scale_mut(1.0 / grads.len() as f64);
        let oracle: f64 = grads
            .iter()
            .rev()
            .map(|g| mean.sub(g).norm_sq())
            .sum::<f64>()
            / grads.len() as f64;
        assert!((term - oracle).abs() <= 1e-12 * oracle.max(1.0));
    }

    #[test]
    fn sgd_term_single_batch() {
        // one client, one batch with gradient (3, 4): term = 25
        let obj = QuadraticObjective::new(2);
        let clients = vec![ClientData {
            client_id: 0,
            batches: vec![QuadraticBatch::new(
                BatchId {
                    client: 0,
                    index: 0,
                },
                crate::param::SquareMatrix::identity(2),
                ParamVector::new(vec![-3.0, -4.0]),
            )],
        }];
        let w = ParamVector::zeros(2);
        assert_eq!(sgd_term(&obj, &clients, &w).unwrap(), 25.0);
        // all batch gradients zero at the common center
        assert_eq!(
            sgd_term(&obj, &clients, &ParamVector::new(vec![-3.0, -4.0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn sgd_term_matches_reordered_summation() {
        let (obj, clients) = synth_quadratic_tasks(4, 3, 5, 2.0, 44).unwrap();
        let w = ParamVector::new(vec![0.3; 5]);
        let term = sgd_term(&obj, &clients, &w).unwrap();
        let mut oracle = 0.0;
        for c in clients.iter().rev() {
            let mut inner = 0.0;
            for b in c.batches.iter().rev() {
                inner += obj.grad(b, &w).unwrap().norm_sq();
            }
            oracle += inner / c.batches.len() as f64;
        }
        oracle /= clients.len() as f64;
        assert!((term - oracle).abs() <= 1e-12 * oracle.max(1.0));
    }

    #[test]
    fn batch_deviation_is_zero_for_homogeneous_clients() {
        // every batch of a client identical -> within-client deviation zero
        let obj = QuadraticObjective::new(1);
        let clients = vec![ClientData {
            client_id: 0,
            batches: (0..3)
                .map(|k| {
                    QuadraticBatch::scalar(
                        BatchId {
                            client: 0,
                            index: k,
                        },
                        1.5,
                        0.7,
                    )
                })
                .collect(),
        }];
        let w = ParamVector::new(vec![2.0]);
        assert_eq!(batch_deviation_term(&obj, &clients, &w).unwrap(), 0.0);
    }

    #[test]
    fn batch_deviation_scalar_case() {
        // one client, batch gradients {0, 2}: mean 1, variance 1
        let obj = QuadraticObjective::new(1);
        let clients = vec![ClientData {
            client_id: 0,
            batches: vec![
                QuadraticBatch::scalar(
                    BatchId {
                        client: 0,
                        index: 0,
                    },
                    1.0,
                    0.0,
                ),
                QuadraticBatch::scalar(
                    BatchId {
                        client: 0,
                        index: 1,
                    },
                    1.0,
                    -2.0,
                ),
            ],
        }];
        let w = ParamVector::zeros(1);
        assert_eq!(batch_deviation_term(&obj, &clients, &w).unwrap(), 1.0);
    }

    #[test]
    fn transformed_dispersion_at_zero_eta_equals_dispersion() {
        let (obj, clients) = synth_quadratic_tasks(5, 2, 3, 3.0, 17).unwrap();
        let w = ParamVector::new(vec![0.4, -0.1, 0.9]);
        let plain = dispersion_term(&obj, &clients, &w).unwrap();
        let transformed = transformed_dispersion_term(&obj, &clients, &w, 2, 3, 0.0).unwrap();
        assert_eq!(plain, transformed);
    }

    #[test]
    fn transformed_dispersion_matches_quadratic_closed_form() {
        // constant Hessians make the shifted gradients exactly affine, so a
        // hand computation with the stored matrices must agree
        let (obj, clients) = synth_quadratic_tasks(3, 2, 2, 2.0, 51).unwrap();
        let w = ParamVector::new(vec![0.2, -0.6]);
        let (a, k, eta) = (2usize, 2usize, 0.05);
        let term = transformed_dispersion_term(&obj, &clients, &w, a, k, eta).unwrap();

        let drift = (a * k) as f64 * eta / 3.0;
        let mut oracle = 0.0;
        for c in &clients {
            let own = mean_grad(&obj, &c.batches, &w).unwrap();
            let shifted = w.axpy(-drift, &own);
            // per-batch affine gradients evaluated straight from A(w' - mu)
            let eval = |cd: &ClientData<QuadraticBatch>| {
                let mut g = ParamVector::zeros(2);
                for b in &cd.batches {
                    g.axpy_mut(1.0, &b.matrix.matvec(&shifted.sub(&b.center)));
                }
                g.scale(1.0 / cd.batches.len() as f64)
            };
            let own_shifted = eval(c);
            let mut global_shifted = ParamVector::zeros(2);
            for other in &clients {
                global_shifted.axpy_mut(1.0, &eval(other));
            }
            global_shifted.scale_mut(1.0 / clients.len() as f64);
            oracle += global_shifted.sub(&own_shifted).norm_sq();
        }
        oracle /= clients.len() as f64;
        assert!((term - oracle).abs() <= 1e-12 * oracle.max(1.0));
    }

    #[test]
    fn secondary_dispersion_scalar_hand_value() {
        // two clients with gradient deviations +/-1 and global Hessian 2:
        // (1/2) * (1*2*1 + 1*2*1) = 2
        let obj = QuadraticObjective::new(1);
        let clients = vec![
            ClientData {
                client_id: 0,
                batches: vec![QuadraticBatch::scalar(
                    BatchId {
                        client: 0,
                        index: 0,
                    },
                    2.0,
                    0.5,
                )],
            },
            ClientData {
                client_id: 1,
                batches: vec![QuadraticBatch::scalar(
                    BatchId {
                        client: 1,
                        index: 0,
                    },
                    2.0,
                    1.5,
                )],
            },
        ];
        // gradients at w=1: 2*(1-0.5)=1 and 2*(1-1.5)=-1; global 0; zeta = -/+1
        let w = ParamVector::new(vec![1.0]);
        assert_eq!(secondary_dispersion_term(&obj, &clients, &w).unwrap(), 2.0);
    }

    #[test]
    fn secondary_dispersion_nonnegative_on_psd_suites() {
        for seed in 0..5 {
            let (obj, clients) = synth_quadratic_tasks(4, 2, 3, 4.0, seed).unwrap();
            let w = ParamVector::new(vec![0.1, 0.2, -0.3]);
            assert!(secondary_dispersion_term(&obj, &clients, &w).unwrap() >= 0.0);
        }
    }
}
