//! Run configuration: a single JSON document that fully determines a run.
//!
//! Unknown keys are rejected by name; validation reports every violation at
//! once. No environment variables influence results, so a manifest plus the
//! config reproduces a run byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fedcore::{default_eps_max, AlgorithmVariant, EpsilonPolicy, FederationConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Quadratic,
    Blobs,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    SoftmaxLinear,
    SmoothMlp,
}

/// Epsilon policy as configured (resolved into an
/// [`EpsilonPolicy`](crate::fedcore::EpsilonPolicy) at build time).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct EpsPolicyConfig {
    pub mode: EpsModeKind,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub r_star: Option<u64>,
    #[serde(default)]
    pub eps_max: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsModeKind {
    Fixed,
    InvSqrtGradNorm,
    Switch,
}

fn default_participation() -> f64 {
    1.0
}

fn default_alpha() -> f64 {
    0.2
}

fn default_heterogeneity() -> f64 {
    1.0
}

fn default_cadence() -> u64 {
    1
}

fn default_dimension() -> usize {
    8
}

fn default_classes() -> usize {
    2
}

fn default_features() -> usize {
    2
}

fn default_examples() -> usize {
    1000
}

fn default_separation() -> f64 {
    6.0
}

fn default_hidden() -> usize {
    8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: AlgorithmVariant,
    pub task: TaskKind,
    pub m: usize,
    pub a: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub eta: f64,
    pub rounds: u64,
    pub batch_size: usize,
    #[serde(default = "default_participation")]
    pub participation: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_heterogeneity")]
    pub heterogeneity: f64,
    pub seed: u64,
    #[serde(default)]
    pub eps_policy: Option<EpsPolicyConfig>,
    #[serde(default = "default_cadence")]
    pub metric_cadence: u64,
    #[serde(default)]
    pub eval_threshold: Option<f64>,
    // task structure
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_classes")]
    pub classes: usize,
    #[serde(default = "default_features")]
    pub features: usize,
    #[serde(default = "default_examples")]
    pub examples: usize,
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    #[serde(default)]
    pub csv_path: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelKind,
}

impl RunConfig {
    pub fn e_steps(&self) -> usize {
        self.a * self.k
    }

    /// Resolve the configured epsilon policy, defaulting FedSAM to the
    /// inverse-sqrt rule capped at `E * eta / 2`.
    pub fn epsilon_policy(&self) -> Result<Option<EpsilonPolicy>> {
        if self.algorithm != AlgorithmVariant::FedSam {
            return Ok(None);
        }
        let cap_default = default_eps_max(self.e_steps(), self.eta);
        let Some(pc) = &self.eps_policy else {
            return Ok(Some(EpsilonPolicy::inv_sqrt(cap_default)));
        };
        let eps_max = pc.eps_max.unwrap_or(cap_default);
        let policy = match pc.mode {
            EpsModeKind::Fixed => {
                let value = pc.value.ok_or_else(|| {
                    Error::Config("eps_policy mode `fixed` requires `value`".into())
                })?;
                EpsilonPolicy::fixed(value, eps_max)
            }
            EpsModeKind::InvSqrtGradNorm => EpsilonPolicy::inv_sqrt(eps_max),
            EpsModeKind::Switch => {
                let r_star = pc.r_star.ok_or_else(|| {
                    Error::Config("eps_policy mode `switch` requires `r_star`".into())
                })?;
                let mut p = EpsilonPolicy::switch_at(r_star, self.e_steps(), self.eta);
                p.eps_max = eps_max;
                p
            }
        };
        Ok(Some(policy))
    }

    pub fn federation_config(&self) -> Result<FederationConfig> {
        Ok(FederationConfig {
            num_clients: self.m,
            local_epochs: self.a,
            steps_per_epoch: self.k,
            eta: self.eta,
            rounds: self.rounds,
            participation: self.participation,
            algorithm: self.algorithm,
            eps_policy: self.epsilon_policy()?,
            seed: self.seed,
            batch_size: self.batch_size,
        })
    }

    /// Every violation found, or the list of warnings if the config is valid.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut violations = Vec::new();
        if self.eta <= 0.0 {
            violations.push(format!("eta must be positive, got {}", self.eta));
        }
        if self.m == 0 {
            violations.push("m must be at least 1".into());
        }
        if self.a == 0 {
            violations.push("a must be at least 1".into());
        }
        if self.k == 0 {
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
        if self.metric_cadence == 0 {
            violations.push("metric_cadence must be at least 1".into());
        }
        if self.heterogeneity < 0.0 {
            violations.push(format!(
                "heterogeneity must be non-negative, got {}",
                self.heterogeneity
            ));
        }
        match self.task {
            TaskKind::Quadratic => {
                if self.dimension == 0 {
                    violations.push("dimension must be at least 1".into());
                }
            }
            TaskKind::Blobs => {
                if self.alpha <= 0.0 {
                    violations.push(format!("alpha must be positive, got {}", self.alpha));
                }
                if self.classes < 2 {
                    violations.push("classes must be at least 2".into());
                }
                if self.features == 0 {
                    violations.push("features must be at least 1".into());
                }
                if self.examples < self.m {
                    violations.push(format!(
                        "examples ({}) must cover the {} clients",
                        self.examples, self.m
                    ));
                }
                if self.separation < 0.0 {
                    violations.push("separation must be non-negative".into());
                }
            }
            TaskKind::Csv => {
                if self.alpha <= 0.0 {
                    violations.push(format!("alpha must be positive, got {}", self.alpha));
                }
                if self.csv_path.is_none() {
                    violations.push("task `csv` requires `csv_path`".into());
                }
            }
        }
        if self.algorithm != AlgorithmVariant::FedSam && self.eps_policy.is_some() {
            violations.push("eps_policy is only meaningful for fedsam".into());
        }
        if let Some(pc) = &self.eps_policy {
            if pc.mode == EpsModeKind::Fixed && pc.value.is_none() {
                violations.push("eps_policy mode `fixed` requires `value`".into());
            }
            if pc.mode == EpsModeKind::Switch && pc.r_star.is_none() {
                violations.push("eps_policy mode `switch` requires `r_star`".into());
            }
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

/// Parse and validate a config file; returns the config plus any warnings.
pub fn load_config(path: &Path) -> Result<(RunConfig, Vec<String>)> {
    let text = std::fs::read_to_string(path)?;
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let warnings = config.validate()?;
    Ok((config, warnings))
}
