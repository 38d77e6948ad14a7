//! FedSAM's perturbation radius and the mid-training switch.
//!
//! Runs FedSAM with the inverse-sqrt epsilon rule and a control that switches
//! epsilon to E*eta/2 at round 150 (which cancels the dispersion term of the
//! modified loss). Prints the mean epsilon and the client-gradient variance
//! around the switch.
//!
//! Run with: cargo run --release --example epsilon_switching

use fedbea::cli::{simulate_to_rows, EpsModeKind, EpsPolicyConfig, ModelKind, RunConfig, TaskKind};
use fedbea::fedcore::AlgorithmVariant;

const SWITCH_ROUND: u64 = 150;

fn config(switched: bool) -> RunConfig {
    RunConfig {
        algorithm: AlgorithmVariant::FedSam,
        task: TaskKind::Blobs,
        m: 10,
        a: 10,
        k: 12,
        eta: 1e-3,
        rounds: 300,
        batch_size: 6,
        participation: 1.0,
        alpha: 0.2,
        heterogeneity: 1.0,
        seed: 42,
        eps_policy: switched.then_some(EpsPolicyConfig {
            mode: EpsModeKind::Switch,
            value: None,
            r_star: Some(SWITCH_ROUND),
            eps_max: None,
        }),
        metric_cadence: 1,
        eval_threshold: None,
        dimension: 8,
        classes: 4,
        features: 2,
        examples: 1200,
        separation: 9.0,
        hidden: 8,
        csv_path: None,
        model: ModelKind::SoftmaxLinear,
    }
}

fn main() -> fedbea::Result<()> {
    let plain = simulate_to_rows(&config(false))?;
    let switched = simulate_to_rows(&config(true))?;
    let cap = 120.0 * 1e-3 / 2.0;
    println!("epsilon cap E*eta/2 = {cap:.4}");
    println!(
        "\nround | {:>10} {:>11} | {:>10} {:>11}",
        "eps(plain)", "var(plain)", "eps(switch)", "var(switch)"
    );
    for i in (120..180).step_by(5).chain([199, 249, 299]) {
        let a = &plain.rows[i];
        let b = &switched.rows[i];
        println!(
            "{:>5} | {:>10.5} {:>11.4e} | {:>10.5} {:>11.4e}",
            a.round,
            a.epsilon_mean.unwrap(),
            a.client_grad_var.unwrap(),
            b.epsilon_mean.unwrap(),
            b.client_grad_var.unwrap()
        );
    }

    let post = |rows: &[fedbea::cli::RoundMetrics]| {
        rows[SWITCH_ROUND as usize..]
            .iter()
            .map(|r| r.client_grad_var.unwrap())
            .sum::<f64>()
            / (rows.len() - SWITCH_ROUND as usize) as f64
    };
    println!(
        "\npost-switch mean client gradient variance: switched {:.4e} vs control {:.4e}",
        post(&switched.rows),
        post(&plain.rows)
    );
    Ok(())
}
