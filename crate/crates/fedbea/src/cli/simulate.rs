//! Experiment orchestration: build the configured task, run rounds, emit
//! metrics.

use std::path::{Path, PathBuf};

use crate::analysis::power_iteration_with;
use crate::bea::{
    batch_deviation_term, dispersion_term, global_hvp, global_loss, secondary_dispersion_term,
};
use crate::cli::config::{ModelKind, RunConfig, TaskKind};
use crate::cli::manifest::write_manifest;
use crate::cli::metrics::{emit_metrics_csv, RoundMetrics};
use crate::data::{
    dirichlet_partition, load_csv_dataset, synth_blobs, synth_quadratic_tasks, ClientData, Dataset,
};
use crate::error::{Error, Result};
use crate::fedcore::{run_round, FederationConfig, FederationState};
use crate::models::{
    DatasetObjective, LabeledBatch, Objective, QuadraticBatch, QuadraticObjective, SmoothMlp,
    SoftmaxLinear,
};
use crate::param::ParamVector;

const POWER_ITERS: usize = 80;
const POWER_TOL: f64 = 1e-6;

/// A fully constructed task ready to simulate.
pub enum BuiltTask {
    Quadratic {
        objective: QuadraticObjective,
        clients: Vec<ClientData<QuadraticBatch>>,
    },
    Dataset {
        objective: DatasetObjective,
        clients: Vec<ClientData<LabeledBatch>>,
        dataset: Dataset,
    },
}

/// Instantiate the task a config describes.
pub fn build_task(config: &RunConfig) -> Result<BuiltTask> {
    match config.task {
        TaskKind::Quadratic => {
            let (objective, clients) = synth_quadratic_tasks(
                config.m,
                config.k,
                config.dimension,
                config.heterogeneity,
                config.seed,
            )?;
            Ok(BuiltTask::Quadratic { objective, clients })
        }
        TaskKind::Blobs => {
            let (dataset, spec) = synth_blobs(
                config.m,
                config.classes,
                config.features,
                config.examples,
                config.alpha,
                config.separation,
                config.seed,
            )?;
            dataset_task(config, dataset, spec.alpha)
        }
        TaskKind::Csv => {
            let path = config
                .csv_path
                .as_ref()
                .ok_or_else(|| Error::Config("task `csv` requires `csv_path`".into()))?;
            let dataset = load_csv_dataset(path)?;
            dataset_task(config, dataset, config.alpha)
        }
    }
}

fn dataset_task(config: &RunConfig, dataset: Dataset, alpha: f64) -> Result<BuiltTask> {
    let shards = dirichlet_partition(
        &dataset,
        &crate::data::PartitionSpec {
            num_clients: config.m,
            alpha,
            seed: config.seed,
        },
    )?;
    let clients: Vec<ClientData<LabeledBatch>> = shards
        .iter()
        .map(|s| {
            Ok(ClientData {
                client_id: s.client_id,
                batches: s.batches(&dataset, config.batch_size)?,
            })
        })
        .collect::<Result<_>>()?;
    let objective = match config.model {
        ModelKind::SoftmaxLinear => DatasetObjective::Softmax(SoftmaxLinear::new(
            dataset.num_classes,
            dataset.num_features(),
        )),
        ModelKind::SmoothMlp => DatasetObjective::Mlp(SmoothMlp::new(
            dataset.num_features(),
            config.hidden,
            dataset.num_classes,
        )),
    };
    Ok(BuiltTask::Dataset {
        objective,
        clients,
        dataset,
    })
}

/// Extra per-round metrics supplied by the task kind (accuracy and Fisher
/// trace exist only for dataset tasks).
#[derive(Clone, Copy, Debug, Default)]
pub struct ExtraMetrics {
    pub eval_metric: Option<f64>,
    pub fisher_trace: Option<f64>,
}

/// Result of a simulation run.
pub struct SimulationOutcome {
    pub rows: Vec<RoundMetrics>,
    pub final_w: ParamVector,
    /// Set when a round diverged; rows hold the completed rounds.
    pub diverged: Option<(u64, String)>,
}

fn compute_metrics<O: Objective>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    w: &ParamVector,
    round: u64,
    epsilon_mean: Option<f64>,
    extra: ExtraMetrics,
) -> Result<RoundMetrics> {
    let dispersion = dispersion_term(obj, clients, w)?;
    let spectrum = power_iteration_with(
        |v| global_hvp(obj, clients, w, v),
        w.dim(),
        POWER_ITERS,
        POWER_TOL,
        0x5EED,
    )?;
    Ok(RoundMetrics {
        round,
        train_loss: Some(global_loss(obj, clients, w)?),
        eval_metric: extra.eval_metric,
        client_grad_var: Some(dispersion),
        batch_grad_var: Some(batch_deviation_term(obj, clients, w)?),
        dispersion: Some(dispersion),
        secondary_dispersion: Some(secondary_dispersion_term(obj, clients, w)?),
        fisher_trace: extra.fisher_trace,
        max_eig: Some(spectrum.max_eigenvalue),
        epsilon_mean,
    })
}

/// Run `cfg.rounds` rounds from `w0`, recording metrics after every
/// `cadence`-th round (and always after the final one). Divergence stops the
/// run and is reported in the outcome rather than as an error so completed
/// rounds can still be flushed.
pub fn run_rounds<O, F>(
    obj: &O,
    clients: &[ClientData<O::Batch>],
    cfg: &FederationConfig,
    w0: ParamVector,
    cadence: u64,
    mut extra: F,
) -> Result<SimulationOutcome>
where
    O: Objective,
    F: FnMut(&ParamVector) -> Result<ExtraMetrics>,
{
    let mut state = FederationState::new(w0, cfg);
    let mut rows = Vec::new();
    while state.round < cfg.rounds {
        let outcome = match run_round(obj, clients, cfg, &mut state) {
            Ok(outcome) => outcome,
            Err(Error::Divergence(msg)) => {
                return Ok(SimulationOutcome {
                    rows,
                    final_w: state.w,
                    diverged: Some((state.round + 1, msg)),
                });
            }
            Err(other) => return Err(other),
        };
        let round = state.round;
        if round.is_multiple_of(cadence) || round == cfg.rounds {
            let extras = extra(&state.w)?;
            rows.push(compute_metrics(
                obj,
                clients,
                &state.w,
                round,
                outcome.epsilon_mean,
                extras,
            )?);
        }
    }
    Ok(SimulationOutcome {
        rows,
        final_w: state.w,
        diverged: None,
    })
}

/// Run the configured simulation in memory.
pub fn simulate_to_rows(config: &RunConfig) -> Result<SimulationOutcome> {
    let fed_cfg = config.federation_config()?;
    match build_task(config)? {
        BuiltTask::Quadratic { objective, clients } => {
            let w0 = ParamVector::zeros(config.dimension);
            run_rounds(
                &objective,
                &clients,
                &fed_cfg,
                w0,
                config.metric_cadence,
                |_| Ok(ExtraMetrics::default()),
            )
        }
        BuiltTask::Dataset {
            objective,
            clients,
            dataset,
        } => {
            let w0 = objective.init_params(config.seed);
            let full = dataset.as_single_batch();
            let singletons = dataset.singleton_batches();
            run_rounds(
                &objective,
                &clients,
                &fed_cfg,
                w0,
                config.metric_cadence,
                |w| {
                    Ok(ExtraMetrics {
                        eval_metric: Some(objective.accuracy(&full, w)?),
                        fisher_trace: Some(crate::analysis::fisher_trace_estimate(
                            &objective,
                            &singletons,
                            w,
                        )?),
                    })
                },
            )
        }
    }
}

/// `simulate` entry point: manifest first, then rounds, then the metrics CSV.
/// Returns the metrics path.
pub fn run_simulation(config: &RunConfig, out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let metrics_path = out_dir.join("metrics.csv");
    write_manifest(
        config,
        "simulate",
        std::slice::from_ref(&metrics_path),
        &out_dir.join("manifest.json"),
    )?;
    let outcome = simulate_to_rows(config)?;
    let mut rows = outcome.rows;
    if let Some((round, ref msg)) = outcome.diverged {
        rows.push(RoundMetrics::error_row(round));
        emit_metrics_csv(&rows, &metrics_path)?;
        return Err(Error::Divergence(format!(
            "{msg}; partial metrics flushed to {}",
            metrics_path.display()
        )));
    }
    emit_metrics_csv(&rows, &metrics_path)?;
    if let Some(threshold) = config.eval_threshold {
        let reached = rows
            .iter()
            .find(|r| r.eval_metric.is_some_and(|m| m >= threshold))
            .map(|r| r.round);
        match reached {
            Some(round) => println!("eval_threshold {threshold} first reached at round {round}"),
            None => println!("eval_threshold {threshold} never reached"),
        }
    }
    Ok(metrics_path)
}
