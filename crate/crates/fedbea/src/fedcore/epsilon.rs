//! Perturbation radius policies for FedSAM.

use serde::{Deserialize, Serialize};

use crate::param::ParamVector;

/// Default clamp `E * eta / 2`: past that radius the dispersion coefficient
/// of the modified loss changes sign, leaving the analyzed regime.
pub fn default_eps_max(e_steps: usize, eta: f64) -> f64 {
    e_steps as f64 * eta / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMode {
    Fixed(f64),
    /// `eps = 0.01 / sqrt(||g||_2)` from the current mini-batch gradient;
    /// more stable than dividing by the norm itself.
    InvSqrtGradNorm,
    /// `inv_sqrt_grad_norm` before `at_round`, then a fixed target
    /// (normally `E * eta / 2`, which cancels the dispersion term).
    Switch {
        at_round: u64,
        target: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonPolicy {
    pub mode: EpsilonMode,
    pub eps_max: f64,
}

impl EpsilonPolicy {
    pub fn fixed(value: f64, eps_max: f64) -> Self {
        EpsilonPolicy {
            mode: EpsilonMode::Fixed(value),
            eps_max,
        }
    }

    pub fn inv_sqrt(eps_max: f64) -> Self {
        EpsilonPolicy {
            mode: EpsilonMode::InvSqrtGradNorm,
            eps_max,
        }
    }

    pub fn switch_at(at_round: u64, e_steps: usize, eta: f64) -> Self {
        let target = default_eps_max(e_steps, eta);
        EpsilonPolicy {
            mode: EpsilonMode::Switch { at_round, target },
            eps_max: target,
        }
    }

    /// Epsilon for one local step, given the mini-batch gradient norm and the
    /// executing round number. Always in `[0, eps_max]`; a vanished gradient
    /// maps to `eps_max` (the inverse-norm rule has no finite value there).
    pub fn epsilon(&self, grad_norm: f64, round: u64) -> f64 {
        let raw = match self.mode {
            EpsilonMode::Fixed(v) => v,
            EpsilonMode::InvSqrtGradNorm => inv_sqrt_rule(grad_norm, self.eps_max),
            EpsilonMode::Switch { at_round, target } => {
                if round >= at_round {
                    target
                } else {
                    inv_sqrt_rule(grad_norm, self.eps_max)
                }
            }
        };
        raw.clamp(0.0, self.eps_max)
    }
}

fn inv_sqrt_rule(grad_norm: f64, eps_max: f64) -> f64 {
    if grad_norm == 0.0 {
        eps_max
    } else {
        0.01 / grad_norm.sqrt()
    }
}

/// Epsilon from a mini-batch gradient under a policy.
pub fn sam_epsilon(g: &ParamVector, policy: &EpsilonPolicy, round: u64) -> f64 {
    policy.epsilon(g.norm_l2(), round)
}
