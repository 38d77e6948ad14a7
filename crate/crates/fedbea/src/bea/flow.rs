//! Continuous-flow references and trajectory deviation measurement.
//!
//! One federated round advances the flow clock by `E * eta`. References are
//! integrated with classical Runge-Kutta at a fine substep so the
//! integrator's own error sits far below the third-order deviations being
//! measured.

use serde::Serialize;

use crate::bea::terms::{dispersion_gradient, global_grad, sgd_term_gradient};
use crate::data::ClientData;
use crate::error::{Error, Result};
use crate::models::Objective;
use crate::param::ParamVector;

/// Per-checkpoint Euclidean distances between a trajectory and a reference.
#[derive(Clone, Debug, Serialize)]
pub struct FlowDeviationTrace {
    pub distances: Vec<f64>,
}

impl FlowDeviationTrace {
    pub fn max(&self) -> f64 {
        self.distances.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn last(&self) -> f64 {
        *self.distances.last().unwrap_or(&0.0)
    }
}

/// Distances between matching checkpoints of two trajectories.
pub fn flow_deviation(
    trajectory: &[ParamVector],
    reference: &[ParamVector],
) -> Result<FlowDeviationTrace> {
    if trajectory.len() != reference.len() {
        return Err(Error::Domain(format!(
            "trajectory has {} checkpoints, reference has {}",
            trajectory.len(),
            reference.len()
        )));
    }
    Ok(FlowDeviationTrace {
        distances: trajectory
            .iter()
            .zip(reference)
            .map(|(a, b)| a.distance(b))
            .collect(),
    })
}

/// Integrate `dw/dt = field(w)` with classical RK4, recording a checkpoint
/// every `time_per_checkpoint` using `substeps` RK4 steps in between.
pub fn integrate_flow<F>(
    field: F,
    w0: &ParamVector,
    time_per_checkpoint: f64,
    checkpoints: usize,
    substeps: usize,
) -> Result<Vec<ParamVector>>
where
    F: Fn(&ParamVector) -> Result<ParamVector>,
{
    if substeps == 0 {
        return Err(Error::Domain(
            "integrator needs at least one substep".into(),
        ));
    }
    let h = time_per_checkpoint / substeps as f64;
    let mut w = w0.clone();
    let mut out = Vec::with_capacity(checkpoints);
    for _ in 0..checkpoints {
        for _ in 0..substeps {
            let k1 = field(&w)?;
            let k2 = field(&w.axpy(h / 2.0, &k1))?;
            let k3 = field(&w.axpy(h / 2.0, &k2))?;
            let k4 = field(&w.axpy(h, &k3))?;
            w.axpy_mut(h / 6.0, &k1);
            w.axpy_mut(h / 3.0, &k2);
            w.axpy_mut(h / 3.0, &k3);
            w.axpy_mut(h / 6.0, &k4);
        }
        if !w.is_finite() {
            return Err(Error::Divergence("flow integration diverged".into()));
        }
        out.push(w.clone());
    }
    Ok(out)
}

/// `dw/dt = −∇L(w)`: the original gradient flow.
pub fn gradient_flow_field<'a, O: Objective>(
    obj: &'a O,
    clients: &'a [ClientData<O::Batch>],
) -> impl Fn(&ParamVector) -> Result<ParamVector> + 'a {
    move |w| Ok(global_grad(obj, clients, w)?.scale(-1.0))
}

/// The modified flow FedAvg's expected rounds follow:
/// `dw/dt = −∇[L − (Eη/4) dispersion + (η/4) sgd_term]`.
pub fn fedavg_modified_flow_field<'a, O: Objective>(
    obj: &'a O,
    clients: &'a [ClientData<O::Batch>],
    eta: f64,
    e_steps: usize,
) -> impl Fn(&ParamVector) -> Result<ParamVector> + 'a {
    let e = e_steps as f64;
    move |w| {
        let mut field = global_grad(obj, clients, w)?.scale(-1.0);
        field.axpy_mut(e * eta / 4.0, &dispersion_gradient(obj, clients, w)?);
        field.axpy_mut(-eta / 4.0, &sgd_term_gradient(obj, clients, w)?);
        Ok(field)
    }
}
