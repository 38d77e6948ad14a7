//! The full verification battery as a library call.
//!
//! Builds quadratic suites from a config, runs every check (exactness floor,
//! residual-order fits, zero-mean identity, coefficient identities,
//! second-order term checks), and prints the JSON report.
//!
//! Run with: cargo run --release --example verification_battery

use fedbea::cli::{verification_report, ModelKind, RunConfig, TaskKind};
use fedbea::fedcore::AlgorithmVariant;

fn main() -> fedbea::Result<()> {
    let config = RunConfig {
        algorithm: AlgorithmVariant::FedAvg,
        task: TaskKind::Quadratic,
        m: 4,
        a: 1,
        k: 2,
        eta: 1e-3,
        rounds: 1,
        batch_size: 1,
        participation: 1.0,
        alpha: 0.2,
        heterogeneity: 2.0,
        seed: 7,
        eps_policy: None,
        metric_cadence: 1,
        eval_threshold: None,
        dimension: 8,
        classes: 2,
        features: 2,
        examples: 100,
        separation: 6.0,
        hidden: 4,
        csv_path: None,
        model: ModelKind::SoftmaxLinear,
    };
    let report = verification_report(&config)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
