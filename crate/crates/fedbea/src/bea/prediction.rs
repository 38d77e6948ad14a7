//! Closed-form second-order predictions of the expected one-round update.

use crate::bea::terms::global_grad;
use crate::data::ClientData;
use crate::error::{Error, Result};
use crate::models::{mean_grad, mean_hvp, Objective};
use crate::param::ParamVector;

/// Which algorithm's expected one-round update to predict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictionVariant {
    FedAvg,
    FedAvgNoDispersion,
    Scaffold,
}

/// Second-order expansion of the expected aggregated parameter after one
/// round of `local_epochs` passes over each client's batches.
///
/// For FedAvg the per-client expectation over batch orders is
/// `w0 − E η ∇L_j + (E²η²/4) ∇(||∇L_j||² − (1/E²) Σ_k ||∇L_jk||²)`,
/// averaged over clients; squared-norm gradients are exact `2 H v` products.
/// The SCAFFOLD variant substitutes round-start control variates
/// (`c_j = ∇L_j(w0)`, `c = ∇L(w0)`), and the no-dispersion variant removes
/// each client's dispersion correction before averaging.
pub fn expected_round_update_prediction<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w0: &ParamVector,
    eta: f64,
    local_epochs: usize,
    variant: PredictionVariant,
) -> Result<ParamVector> {
    if clients.is_empty() {
        return Err(Error::Domain("prediction over an empty client set".into()));
    }
    if local_epochs == 0 {
        return Err(Error::Domain(
            "prediction needs at least one local epoch".into(),
        ));
    }
    let a = local_epochs as f64;
    let global = global_grad(obj, clients, w0)?;
    let m = clients.len() as f64;

    let mut acc = ParamVector::zeros(w0.dim());
    for client in clients {
        let k = client.batches.len() as f64;
        let e = a * k;
        let own_grad = mean_grad(obj, &client.batches, w0)?;

        let mut pred = w0.clone();
        match variant {
            PredictionVariant::FedAvg | PredictionVariant::FedAvgNoDispersion => {
                // first order: follow the client's own mean gradient
                pred.axpy_mut(-e * eta, &own_grad);
                // (E²η²/4) ∇||∇L_j||² = (E²η²/2) H_j ∇L_j
                let h_own = mean_hvp(obj, &client.batches, w0, &own_grad)?;
                pred.axpy_mut(e * e * eta * eta / 2.0, &h_own);
                // −(η²/4) Σ_steps ∇||∇L_jk||²; each batch is visited `a` times
                for b in &client.batches {
                    let g = obj.grad(b, w0)?;
                    let h_g = obj.hvp(b, w0, &g)?;
                    pred.axpy_mut(-a * eta * eta / 2.0, &h_g);
                }
            }
            PredictionVariant::Scaffold => {
                // local steps follow g_jk − c_j + c with round-start variates,
                // so the first-order drift is the global gradient
                pred.axpy_mut(-e * eta, &global);
                let h_global = mean_hvp(obj, &client.batches, w0, &global)?;
                pred.axpy_mut(e * e * eta * eta / 2.0, &h_global);
                for b in &client.batches {
                    let mut g = obj.grad(b, w0)?;
                    g.axpy_mut(-1.0, &own_grad);
                    g.axpy_mut(1.0, &global);
                    let h_g = obj.hvp(b, w0, &g)?;
                    pred.axpy_mut(-a * eta * eta / 2.0, &h_g);
                }
            }
        }

        if variant == PredictionVariant::FedAvgNoDispersion {
            // subtract that client's dispersion correction
            // (E²η²/4)(∇||∇L_j||² − ∇||∇L||²)
            let h_own = mean_hvp(obj, &client.batches, w0, &own_grad)?;
            pred.axpy_mut(-e * e * eta * eta / 2.0, &h_own);
            let mut h_global_full = ParamVector::zeros(w0.dim());
            for other in clients {
                h_global_full.axpy_mut(1.0, &mean_hvp(obj, &other.batches, w0, &global)?);
            }
            h_global_full.scale_mut(1.0 / m);
            pred.axpy_mut(e * e * eta * eta / 2.0, &h_global_full);
        }

        acc.axpy_mut(1.0, &pred);
    }
    acc.scale_mut(1.0 / m);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BatchId, QuadraticBatch, QuadraticObjective};

    #[test]
    fn hand_computed_two_step_expectation() {
        // one client, two unit-curvature batches at centers {0, 2}, w0 = 0,
        // eta = 0.1: the per-order finals are 0.20 and 0.18, mean 0.19
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
                    2.0,
                ),
            ],
        }];
        let pred = expected_round_update_prediction(
            &obj,
            &clients,
            &ParamVector::zeros(1),
            0.1,
            1,
            PredictionVariant::FedAvg,
        )
        .unwrap();
        assert!((pred[0] - 0.19).abs() < 1e-15, "prediction {}", pred[0]);
    }

    #[test]
    fn stationary_point_is_a_fixed_point() {
        // all batch gradients zero at the shared center
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
                    0.5,
                ),
                QuadraticBatch::scalar(
                    BatchId {
                        client: 0,
                        index: 1,
                    },
                    2.0,
                    0.5,
                ),
            ],
        }];
        let w0 = ParamVector::new(vec![0.5]);
        for variant in [
            PredictionVariant::FedAvg,
            PredictionVariant::FedAvgNoDispersion,
            PredictionVariant::Scaffold,
        ] {
            let pred =
                expected_round_update_prediction(&obj, &clients, &w0, 0.1, 1, variant).unwrap();
            assert_eq!(pred, w0);
        }
    }

    #[test]
    fn zero_eta_returns_w0() {
        let obj = QuadraticObjective::new(1);
        let clients = vec![ClientData {
            client_id: 0,
            batches: vec![QuadraticBatch::scalar(
                BatchId {
                    client: 0,
                    index: 0,
                },
                1.0,
                3.0,
            )],
        }];
        let w0 = ParamVector::new(vec![-1.0]);
        let pred = expected_round_update_prediction(
            &obj,
            &clients,
            &w0,
            0.0,
            1,
            PredictionVariant::FedAvg,
        )
        .unwrap();
        assert_eq!(pred, w0);
    }

    #[test]
    fn scaffold_prediction_equals_fedavg_for_single_client() {
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
                    0.5,
                    2.0,
                ),
            ],
        }];
        let w0 = ParamVector::new(vec![0.3]);
        let avg = expected_round_update_prediction(
            &obj,
            &clients,
            &w0,
            0.05,
            1,
            PredictionVariant::FedAvg,
        )
        .unwrap();
        let sc = expected_round_update_prediction(
            &obj,
            &clients,
            &w0,
            0.05,
            1,
            PredictionVariant::Scaffold,
        )
        .unwrap();
        assert!((avg[0] - sc[0]).abs() < 1e-15);
    }
}
