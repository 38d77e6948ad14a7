//! Exact expectation oracles over batch orders.
//!
//! Clients update independently from the shared round-start parameter, so
//! the expected aggregated update is the client-mean of per-client
//! expectations, each taken over that client's `E!` batch orders. The
//! enumeration is therefore `m * E!` trajectories, never `(E!)^m`.

use rand::Rng;

use crate::data::ClientData;
use crate::error::{Error, Result};
use crate::models::{mean_grad, mean_hvp, Objective};
use crate::param::ParamVector;
use crate::rng::{domain, stream};
use serde::Serialize;

/// Largest per-client batch count enumerated exactly.
pub const MAX_EXACT_STEPS: usize = 6;

/// Exact one-round expectation data.
#[derive(Clone, Debug, Serialize)]
pub struct PermutationOracleReport {
    /// Client-mean of the per-client expected final parameters.
    pub expected_update: ParamVector,
    /// Final parameter per client per order (orders in lexicographic
    /// position order).
    pub per_order_updates: Vec<Vec<ParamVector>>,
    /// Client-mean over orders of (direct second-order coefficient minus its
    /// closed form); zero up to rounding for any objective.
    pub xi_mean_discrepancy: ParamVector,
    /// Orders enumerated per client (`E!`).
    pub orders_enumerated: usize,
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Calls `f` with every permutation of `0..n` in lexicographic order.
fn for_each_permutation<F: FnMut(&[usize]) -> Result<()>>(n: usize, mut f: F) -> Result<()> {
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        f(&perm)?;
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| perm[i] < perm[i + 1])
        else {
            return Ok(());
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

fn uniform_batch_count<B>(clients: &[ClientData<B>]) -> Result<usize> {
    let Some(first) = clients.first() else {
        return Err(Error::Domain("oracle over an empty client set".into()));
    };
    let e = first.batches.len();
    if e == 0 {
        return Err(Error::Domain("oracle over a client with no batches".into()));
    }
    if clients.iter().any(|c| c.batches.len() != e) {
        return Err(Error::Domain(
            "exact enumeration requires the same batch count on every client".into(),
        ));
    }
    if e > MAX_EXACT_STEPS {
        return Err(Error::Capability(format!(
            "{e}! orders per client exceeds the exact-enumeration cap of {MAX_EXACT_STEPS} \
             steps; use monte_carlo_expected_update instead"
        )));
    }
    Ok(e)
}

/// Exact `E[w_E]` for one FedAvg round, by enumerating every batch order per
/// client and averaging, plus the zero-mean check on the second-order
/// coefficient.
pub fn brute_force_expected_update<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w0: &ParamVector,
    eta: f64,
) -> Result<PermutationOracleReport> {
    let e = uniform_batch_count(clients)?;
    let orders = factorial(e);
    let mut per_client_expected = Vec::with_capacity(clients.len());
    let mut per_order_updates = Vec::with_capacity(clients.len());
    let mut xi_acc = ParamVector::zeros(w0.dim());

    for client in clients {
        // pairwise HVP table T[k][l] = H_k(w0) g_l(w0) for the xi check
        let grads: Vec<ParamVector> = client
            .batches
            .iter()
            .map(|b| obj.grad(b, w0))
            .collect::<Result<_>>()?;
        let mut hvp_table = Vec::with_capacity(e);
        for b in &client.batches {
            let mut row = Vec::with_capacity(e);
            for g in &grads {
                row.push(obj.hvp(b, w0, g)?);
            }
            hvp_table.push(row);
        }

        // closed form for E[xi]:
        // (E²/2) H_j ∇L_j − (1/2) Σ_k H_k ∇L_k, via independent HVP calls
        let own_grad = mean_grad(obj, &client.batches, w0)?;
        let mut xi_closed =
            mean_hvp(obj, &client.batches, w0, &own_grad)?.scale((e * e) as f64 / 2.0);
        for (k, row) in hvp_table.iter().enumerate() {
            xi_closed.axpy_mut(-0.5, &row[k]);
        }

        let mut order_finals = Vec::with_capacity(orders);
        let mut client_expected = ParamVector::zeros(w0.dim());
        let mut xi_direct_mean = ParamVector::zeros(w0.dim());
        for_each_permutation(e, |perm| {
            let mut w = w0.clone();
            for &bi in perm {
                let g = obj.grad(&client.batches[bi], &w)?;
                w.axpy_mut(-eta, &g);
            }
            client_expected.axpy_mut(1.0, &w);
            order_finals.push(w);
            // direct xi for this order: sum over later-step Hessians applied
            // to earlier-step gradients
            for (pos, &k) in perm.iter().enumerate() {
                for &l in &perm[..pos] {
                    xi_direct_mean.axpy_mut(1.0, &hvp_table[k][l]);
                }
            }
            Ok(())
        })?;
        client_expected.scale_mut(1.0 / orders as f64);
        xi_direct_mean.scale_mut(1.0 / orders as f64);

        xi_acc.axpy_mut(1.0, &xi_direct_mean.sub(&xi_closed));
        per_client_expected.push(client_expected);
        per_order_updates.push(order_finals);
    }

    xi_acc.scale_mut(1.0 / clients.len() as f64);
    Ok(PermutationOracleReport {
        expected_update: ParamVector::mean(&per_client_expected)?,
        per_order_updates,
        xi_mean_discrepancy: xi_acc,
        orders_enumerated: orders,
    })
}

/// Exact `E[w_E]` for one SCAFFOLD round with round-start ideal variates
/// (`c_j = ∇L_j(w0)`, `c = ∇L(w0)`), fixed during the round.
pub fn brute_force_scaffold_expected_update<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w0: &ParamVector,
    eta: f64,
) -> Result<ParamVector> {
    let e = uniform_batch_count(clients)?;
    let orders = factorial(e);
    let client_grads: Vec<ParamVector> = clients
        .iter()
        .map(|c| mean_grad(obj, &c.batches, w0))
        .collect::<Result<_>>()?;
    let global = ParamVector::mean(&client_grads)?;

    let mut per_client_expected = Vec::with_capacity(clients.len());
    for (client, own_grad) in clients.iter().zip(&client_grads) {
        let correction = global.sub(own_grad);
        let mut client_expected = ParamVector::zeros(w0.dim());
        for_each_permutation(e, |perm| {
            let mut w = w0.clone();
            for &bi in perm {
                let mut g = obj.grad(&client.batches[bi], &w)?;
                g.axpy_mut(1.0, &correction);
                w.axpy_mut(-eta, &g);
            }
            client_expected.axpy_mut(1.0, &w);
            Ok(())
        })?;
        client_expected.scale_mut(1.0 / orders as f64);
        per_client_expected.push(client_expected);
    }
    ParamVector::mean(&per_client_expected)
}

/// Monte-Carlo estimate of the FedAvg one-round expectation for batch counts
/// past the exact-enumeration cap. Returns the sample mean and a scalar
/// standard error (`||per-coordinate std|| / sqrt(trials)`).
pub fn monte_carlo_expected_update<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w0: &ParamVector,
    eta: f64,
    trials: usize,
    seed: u64,
) -> Result<(ParamVector, f64)> {
    if clients.is_empty() {
        return Err(Error::Domain("oracle over an empty client set".into()));
    }
    if trials < 2 {
        return Err(Error::Domain("monte carlo needs at least 2 trials".into()));
    }
    let mut samples = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut per_client = Vec::with_capacity(clients.len());
        for client in clients {
            let e = client.batches.len();
            if e == 0 {
                return Err(Error::Domain("oracle over a client with no batches".into()));
            }
            let mut order: Vec<usize> = (0..e).collect();
            let mut rng = stream(
                seed,
                domain::MONTE_CARLO,
                &[trial as u64, client.client_id as u64],
            );
            for i in (1..e).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            let mut w = w0.clone();
            for &bi in &order {
                let g = obj.grad(&client.batches[bi], &w)?;
                w.axpy_mut(-eta, &g);
            }
            per_client.push(w);
        }
        samples.push(ParamVector::mean(&per_client)?);
    }
    let mean = ParamVector::mean(&samples)?;
    let mut var_sum = 0.0;
    for s in &samples {
        var_sum += s.sub(&mean).norm_sq();
    }
    let stderr = (var_sum / (trials - 1) as f64).sqrt() / (trials as f64).sqrt();
    Ok((mean, stderr))
}
