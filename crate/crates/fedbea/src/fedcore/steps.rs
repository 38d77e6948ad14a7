//! Local update rules.

use crate::data::{batch_schedule, ClientData};
use crate::error::{Error, Result};
use crate::models::Objective;
use crate::param::ParamVector;

pub(crate) fn check_finite(
    w: &ParamVector,
    round: u64,
    client: usize,
    epoch: usize,
    step: usize,
) -> Result<()> {
    if w.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence(format!(
            "parameter became non-finite at round {round}, client {client}, epoch {epoch}, step {step}"
        )))
    }
}

/// `a` local epochs of plain SGD over the client's batches, visiting them in
/// the hash-derived per-epoch order.
pub fn local_sgd_round<O: Objective>(
    obj: &O,
    client: &ClientData<O::Batch>,
    w0: &ParamVector,
    eta: f64,
    local_epochs: usize,
    round: u64,
    master_seed: u64,
) -> Result<ParamVector> {
    let k = client.batches.len();
    if k == 0 {
        return Err(Error::Domain(format!(
            "client {} has no batches",
            client.client_id
        )));
    }
    let mut w = w0.clone();
    for epoch in 0..local_epochs {
        let order = batch_schedule(k, client.client_id, round, epoch, master_seed)?;
        for (step, &bi) in order.iter().enumerate() {
            let g = obj.grad(&client.batches[bi], &w)?;
            w.axpy_mut(-eta, &g);
            check_finite(&w, round, client.client_id, epoch, step)?;
        }
    }
    Ok(w)
}

/// One sharpness-aware step: the gradient is taken at the point perturbed by
/// `eps` times the current gradient. `eps = 0` reduces to plain SGD exactly.
pub fn sam_step<O: Objective>(
    obj: &O,
    batch: &O::Batch,
    w: &ParamVector,
    eta: f64,
    eps: f64,
) -> Result<ParamVector> {
    if eps < 0.0 {
        return Err(Error::Domain(format!(
            "sam perturbation must be non-negative, got {eps}"
        )));
    }
    let g = obj.grad(batch, w)?;
    if eps == 0.0 {
        return Ok(w.axpy(-eta, &g));
    }
    let g_perturbed = obj.grad(batch, &w.axpy(eps, &g))?;
    Ok(w.axpy(-eta, &g_perturbed))
}

/// One SCAFFOLD step: `w − eta (grad − c_j + c)`.
pub fn scaffold_local_step<O: Objective>(
    obj: &O,
    batch: &O::Batch,
    w: &ParamVector,
    eta: f64,
    c_client: &ParamVector,
    c_server: &ParamVector,
) -> Result<ParamVector> {
    let mut dir = obj.grad(batch, w)?;
    dir.axpy_mut(-1.0, c_client);
    dir.axpy_mut(1.0, c_server);
    Ok(w.axpy(-eta, &dir))
}
