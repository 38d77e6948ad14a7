//! Configuration loading, experiment orchestration, and deterministic
//! metrics export behind the `simulate` / `verify` / `partition` commands.

mod config;
mod manifest;
mod metrics;
mod partition_cmd;
mod simulate;
mod verify;

pub use config::{load_config, EpsModeKind, EpsPolicyConfig, ModelKind, RunConfig, TaskKind};
pub use manifest::{write_manifest, RunManifest};
pub use metrics::{
    emit_metrics_csv, metrics_to_csv, parse_metrics_csv, RoundMetrics, METRICS_HEADER,
};
pub use partition_cmd::run_partition;
pub use simulate::{
    build_task, run_rounds, run_simulation, simulate_to_rows, BuiltTask, ExtraMetrics,
    SimulationOutcome,
};
pub use verify::{
    run_verification, verification_report, VerificationReport, EXACTNESS_TOLERANCE,
    EXPONENT_WINDOW, RESIDUAL_ETAS, XI_TOLERANCE,
};
