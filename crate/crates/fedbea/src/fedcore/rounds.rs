//! Round orchestration.
//!
//! Every round draws per-client schedules from hash-derived streams and
//! aggregates in ascending client-id order, so results do not depend on the
//! order in which clients are processed.

use crate::data::{batch_schedule, ClientData};
use crate::error::{Error, Result};
use crate::fedcore::steps::check_finite;
use crate::fedcore::{
    local_sgd_round, sample_participants, AlgorithmVariant, ControlVariates, FederationConfig,
    FederationState,
};
use crate::models::{mean_grad, mean_hvp, Objective};
use crate::param::ParamVector;
use crate::rng::{domain, stream};
use rand::Rng;

/// Per-round telemetry.
#[derive(Clone, Debug, Default)]
pub struct RoundOutcome {
    /// Mean of the per-step epsilon values (FedSAM rounds only).
    pub epsilon_mean: Option<f64>,
}

/// Mean of client parameters, reduced in ascending client-id order so any
/// input permutation produces identical bits.
pub fn aggregate(params: &[(usize, ParamVector)]) -> Result<ParamVector> {
    if params.is_empty() {
        return Err(Error::Domain("aggregate of an empty client set".into()));
    }
    let dim = params[0].1.dim();
    let mut sorted: Vec<&(usize, ParamVector)> = params.iter().collect();
    sorted.sort_by_key(|(id, _)| *id);
    let mut acc = ParamVector::zeros(dim);
    for (_, w) in sorted {
        if w.dim() != dim {
            return Err(Error::Dimension(
                "aggregate over mixed parameter dimensions".into(),
            ));
        }
        acc.axpy_mut(1.0, w);
    }
    acc.scale_mut(1.0 / params.len() as f64);
    Ok(acc)
}

fn round_participants(cfg: &FederationConfig, round: u64) -> Vec<usize> {
    sample_participants(cfg.num_clients, cfg.participation, round, cfg.seed)
}

/// One FedAvg round: sampled clients run local SGD from the shared parameter,
/// then the server averages.
pub fn fedavg_round<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    cfg: &FederationConfig,
    state: &mut FederationState,
) -> Result<RoundOutcome> {
    let round = state.round + 1;
    let mut locals = Vec::new();
    for &j in &round_participants(cfg, round) {
        let w_j = local_sgd_round(
            obj,
            &clients[j],
            &state.w,
            cfg.eta,
            cfg.local_epochs,
            round,
            cfg.seed,
        )?;
        locals.push((j, w_j));
    }
    state.w = aggregate(&locals)?;
    state.round = round;
    Ok(RoundOutcome::default())
}

/// The correction each participating client subtracts from its local result
/// before aggregation:
/// `(a^2 K_j^2 eta^2 / 4) * (grad ||grad L_j||^2 − grad ||grad L||^2)`,
/// all gradients taken at the round-start parameter. The squared-norm
/// gradients are computed exactly as `2 H v` via Hessian-vector products.
pub fn dispersion_corrections<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    participants: &[usize],
    w0: &ParamVector,
    local_epochs: usize,
    eta: f64,
) -> Result<Vec<ParamVector>> {
    let client_grads: Vec<ParamVector> = participants
        .iter()
        .map(|&j| mean_grad(obj, &clients[j].batches, w0))
        .collect::<Result<_>>()?;
    let global_grad = ParamVector::mean(&client_grads)?;

    // grad ||grad L||^2 = 2 H(w0) grad L(w0), with H the participant-mean Hessian
    let mut global_sqnorm_grad = ParamVector::zeros(w0.dim());
    for &j in participants {
        global_sqnorm_grad.axpy_mut(2.0, &mean_hvp(obj, &clients[j].batches, w0, &global_grad)?);
    }
    global_sqnorm_grad.scale_mut(1.0 / participants.len() as f64);

    let mut corrections = Vec::with_capacity(participants.len());
    for (pos, &j) in participants.iter().enumerate() {
        let own_sqnorm_grad =
            mean_hvp(obj, &clients[j].batches, w0, &client_grads[pos])?.scale(2.0);
        let e_j = (local_epochs * clients[j].batches.len()) as f64;
        let coeff = e_j * e_j * eta * eta / 4.0;
        corrections.push(own_sqnorm_grad.sub(&global_sqnorm_grad).scale(coeff));
    }
    Ok(corrections)
}

/// FedAvg with the dispersion bias removed: each client's local result has
/// its dispersion correction subtracted before aggregation.
pub fn fedavg_no_dispersion_round<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    cfg: &FederationConfig,
    state: &mut FederationState,
) -> Result<RoundOutcome> {
    let round = state.round + 1;
    let participants = round_participants(cfg, round);
    let corrections = dispersion_corrections(
        obj,
        clients,
        &participants,
        &state.w,
        cfg.local_epochs,
        cfg.eta,
    )?;
    let mut locals = Vec::new();
    for (pos, &j) in participants.iter().enumerate() {
        let mut w_j = local_sgd_round(
            obj,
            &clients[j],
            &state.w,
            cfg.eta,
            cfg.local_epochs,
            round,
            cfg.seed,
        )?;
        w_j.axpy_mut(-1.0, &corrections[pos]);
        locals.push((j, w_j));
    }
    state.w = aggregate(&locals)?;
    state.round = round;
    Ok(RoundOutcome::default())
}

/// FedSAM round: every local step perturbs by epsilon from the policy applied
/// to that step's mini-batch gradient.
pub fn fedsam_round<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    cfg: &FederationConfig,
    state: &mut FederationState,
) -> Result<RoundOutcome> {
    let policy = cfg
        .eps_policy
        .ok_or_else(|| Error::Config("fedsam requires an epsilon policy".into()))?;
    let round = state.round + 1;
    let mut locals = Vec::new();
    let mut eps_sum = 0.0;
    let mut eps_count = 0usize;
    for &j in &round_participants(cfg, round) {
        let client = &clients[j];
        let k = client.batches.len();
        if k == 0 {
            return Err(Error::Domain(format!("client {j} has no batches")));
        }
        let mut w = state.w.clone();
        for epoch in 0..cfg.local_epochs {
            let order = batch_schedule(k, client.client_id, round, epoch, cfg.seed)?;
            for (step, &bi) in order.iter().enumerate() {
                let g = obj.grad(&client.batches[bi], &w)?;
                let eps = policy.epsilon(g.norm_l2(), round);
                eps_sum += eps;
                eps_count += 1;
                if eps == 0.0 {
                    w.axpy_mut(-cfg.eta, &g);
                } else {
                    let g_perturbed = obj.grad(&client.batches[bi], &w.axpy(eps, &g))?;
                    w.axpy_mut(-cfg.eta, &g_perturbed);
                }
                check_finite(&w, round, j, epoch, step)?;
            }
        }
        locals.push((j, w));
    }
    state.w = aggregate(&locals)?;
    state.round = round;
    Ok(RoundOutcome {
        epsilon_mean: Some(eps_sum / eps_count as f64),
    })
}

/// SCAFFOLD round under ideal variates: locals run with the current
/// variates fixed, then all variates refresh to the full client gradients at
/// the new round-start parameter. Variates start at zero, so round 1 matches
/// FedAvg exactly.
pub fn scaffold_round<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    cfg: &FederationConfig,
    state: &mut FederationState,
) -> Result<RoundOutcome> {
    let round = state.round + 1;
    let variates = match &state.variates {
        Some(v) => v.clone(),
        None => ControlVariates::zeros(cfg.num_clients, state.w.dim()),
    };
    let mut locals = Vec::new();
    for &j in &round_participants(cfg, round) {
        let client = &clients[j];
        let k = client.batches.len();
        if k == 0 {
            return Err(Error::Domain(format!("client {j} has no batches")));
        }
        // w − eta (g − c_j + c) = w − eta (g + correction)
        let correction = variates.server.sub(&variates.clients[j]);
        let correction_is_zero = correction.iter().all(|&x| x == 0.0);
        let mut w = state.w.clone();
        for epoch in 0..cfg.local_epochs {
            let order = batch_schedule(k, client.client_id, round, epoch, cfg.seed)?;
            for (step, &bi) in order.iter().enumerate() {
                let mut g = obj.grad(&client.batches[bi], &w)?;
                if !correction_is_zero {
                    g.axpy_mut(1.0, &correction);
                }
                w.axpy_mut(-cfg.eta, &g);
                check_finite(&w, round, j, epoch, step)?;
            }
        }
        locals.push((j, w));
    }
    state.w = aggregate(&locals)?;
    state.round = round;
    state.variates = Some(ControlVariates::refresh(obj, clients, &state.w)?);
    Ok(RoundOutcome::default())
}

/// Centralized SGD baseline: one round is a single pass over all clients'
/// batches, each visited `a` times, in one globally shuffled order. This
/// aligns the round axis with the federated algorithms at equal batch-visit
/// counts.
pub fn central_sgd_epoch<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    cfg: &FederationConfig,
    state: &mut FederationState,
) -> Result<RoundOutcome> {
    let round = state.round + 1;
    let mut visits: Vec<(usize, usize)> = Vec::new();
    for _ in 0..cfg.local_epochs {
        for client in clients {
            for k in 0..client.batches.len() {
                visits.push((client.client_id, k));
            }
        }
    }
    if visits.is_empty() {
        return Err(Error::Domain("no batches to visit".into()));
    }
    let mut rng = stream(cfg.seed, domain::CENTRAL_SCHEDULE, &[round]);
    for i in (1..visits.len()).rev() {
        let j = rng.gen_range(0..=i);
        visits.swap(i, j);
    }
    let mut w = state.w.clone();
    for (step, &(j, bi)) in visits.iter().enumerate() {
        let g = obj.grad(&clients[j].batches[bi], &w)?;
        w.axpy_mut(-cfg.eta, &g);
        check_finite(&w, round, j, 0, step)?;
    }
    state.w = w;
    state.round = round;
    Ok(RoundOutcome::default())
}

/// Execute one round of the configured algorithm.
pub fn run_round<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    cfg: &FederationConfig,
    state: &mut FederationState,
) -> Result<RoundOutcome> {
    match cfg.algorithm {
        AlgorithmVariant::FedAvg => fedavg_round(obj, clients, cfg, state),
        AlgorithmVariant::FedAvgNoDispersion => {
            fedavg_no_dispersion_round(obj, clients, cfg, state)
        }
        AlgorithmVariant::FedSam => fedsam_round(obj, clients, cfg, state),
        AlgorithmVariant::Scaffold => scaffold_round(obj, clients, cfg, state),
        AlgorithmVariant::CentralSgd => central_sgd_epoch(obj, clients, cfg, state),
    }
}
