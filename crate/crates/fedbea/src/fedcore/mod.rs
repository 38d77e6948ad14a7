//! Federated optimization rounds: FedAvg, FedAvg without the dispersion
//! correction bias, FedSAM, SCAFFOLD with ideal control variates, and a
//! centralized SGD baseline aligned at equal batch-visit counts.

mod epsilon;
mod participation;
mod rounds;
mod steps;

pub use epsilon::{default_eps_max, sam_epsilon, EpsilonMode, EpsilonPolicy};
pub use participation::sample_participants;
pub use rounds::{
    aggregate, central_sgd_epoch, dispersion_corrections, fedavg_no_dispersion_round, fedavg_round,
    fedsam_round, run_round, scaffold_round, RoundOutcome,
};
pub use steps::{local_sgd_round, sam_step, scaffold_local_step};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{mean_grad, Objective};
use crate::param::ParamVector;

/// The algorithm executed each round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlgorithmVariant {
    #[serde(rename = "fedavg")]
    FedAvg,
    #[serde(rename = "fedavg_no_dispersion")]
    FedAvgNoDispersion,
    #[serde(rename = "fedsam")]
    FedSam,
    #[serde(rename = "scaffold")]
    Scaffold,
    #[serde(rename = "central_sgd")]
    CentralSgd,
}

/// Static round structure: `m` clients, `a` local epochs of `K` steps each,
/// so `E = a * K` local steps per round.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FederationConfig {
    pub num_clients: usize,
    pub local_epochs: usize,
    pub steps_per_epoch: usize,
    pub eta: f64,
    pub rounds: u64,
    pub participation: f64,
    pub algorithm: AlgorithmVariant,
    pub eps_policy: Option<EpsilonPolicy>,
    pub seed: u64,
    pub batch_size: usize,
}

impl FederationConfig {
    /// Nominal local steps per round, `E = a * K`. Dataset-backed tasks may
    /// give individual clients more or fewer batches; this nominal value
    /// drives the epsilon policy and the step-size warning.
    pub fn e_steps(&self) -> usize {
        self.local_epochs * self.steps_per_epoch
    }

    /// Collects hard violations (errors) and soft ones (warnings).
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut violations = Vec::new();
        if self.eta <= 0.0 {
            violations.push(format!("eta must be positive, got {}", self.eta));
        }
        if self.num_clients == 0 {
            violations.push("m must be at least 1".into());
        }
        if self.local_epochs == 0 {
            violations.push("a must be at least 1".into());
        }
        if self.steps_per_epoch == 0 {
            violations.push("K must be at least 1".into());
        }
        if self.batch_size == 0 {
            violations.push("batch_size must be at least 1".into());
        }
        if !(self.participation > 0.0 && self.participation <= 1.0) {
            violations.push(format!(
                "participation must lie in (0, 1], got {}",
                self.participation
            ));
        }
        if self.algorithm != AlgorithmVariant::FedSam && self.eps_policy.is_some() {
            violations.push("eps_policy is only meaningful for fedsam".into());
        }
        if !violations.is_empty() {
            return Err(Error::Config(violations.join("; ")));
        }
        let mut warnings = Vec::new();
        let e_eta = self.eta * self.e_steps() as f64;
        if e_eta > 0.5 {
            warnings.push(format!(
                "eta * E = {e_eta:.4} exceeds 0.5; the second-order analysis assumes eta * E small"
            ));
        }
        Ok(warnings)
    }
}

/// Server and per-client control variates for SCAFFOLD.
#[derive(Clone, Debug)]
pub struct ControlVariates {
    pub server: ParamVector,
    pub clients: Vec<ParamVector>,
}

impl ControlVariates {
    pub fn zeros(num_clients: usize, dim: usize) -> Self {
        ControlVariates {
            server: ParamVector::zeros(dim),
            clients: vec![ParamVector::zeros(dim); num_clients],
        }
    }

    /// Ideal variates: each client's full-shard gradient at `w`, with the
    /// server variate their mean.
    pub fn refresh<O: Objective>(
        obj: &O,
        clients: &[crate::data::ClientData<O::Batch>],
        w: &ParamVector,
    ) -> Result<Self> {
        let per_client: Vec<ParamVector> = clients
            .iter()
            .map(|c| mean_grad(obj, &c.batches, w))
            .collect::<Result<_>>()?;
        let server = ParamVector::mean(&per_client)?;
        Ok(ControlVariates {
            server,
            clients: per_client,
        })
    }

    /// `||mean_j c_j − c||_inf`; zero up to rounding after every refresh.
    pub fn mean_defect(&self) -> f64 {
        let mean = ParamVector::mean(&self.clients).expect("non-empty variates");
        mean.sub(&self.server).norm_inf()
    }
}

/// Mutable cross-round state.
#[derive(Clone, Debug)]
pub struct FederationState {
    pub w: ParamVector,
    /// Number of completed rounds.
    pub round: u64,
    pub variates: Option<ControlVariates>,
}

impl FederationState {
    pub fn new(w0: ParamVector, cfg: &FederationConfig) -> Self {
        let variates = match cfg.algorithm {
            AlgorithmVariant::Scaffold => Some(ControlVariates::zeros(cfg.num_clients, w0.dim())),
            _ => None,
        };
        FederationState {
            w: w0,
            round: 0,
            variates,
        }
    }
}
