//! Removing the dispersion bias from FedAvg.
//!
//! Trains softmax-linear on Dirichlet non-IID Gaussian blobs with FedAvg,
//! FedAvg minus the per-client dispersion correction, and SCAFFOLD, and
//! prints the loss and client-gradient-variance trajectories. The corrected
//! variant converges faster with lower variance and tracks SCAFFOLD.
//!
//! Run with: cargo run --release --example dispersion_removal

use fedbea::cli::{simulate_to_rows, ModelKind, RunConfig, SimulationOutcome, TaskKind};
use fedbea::fedcore::AlgorithmVariant;

fn config(algorithm: AlgorithmVariant) -> RunConfig {
    RunConfig {
        algorithm,
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
        eps_policy: None,
        metric_cadence: 25,
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
    let runs: Vec<(&str, SimulationOutcome)> = [
        ("fedavg", AlgorithmVariant::FedAvg),
        ("no_dispersion", AlgorithmVariant::FedAvgNoDispersion),
        ("scaffold", AlgorithmVariant::Scaffold),
    ]
    .into_iter()
    .map(|(name, algorithm)| Ok((name, simulate_to_rows(&config(algorithm))?)))
    .collect::<fedbea::Result<_>>()?;

    println!(
        "round | {:>24} | {:>24} | {:>24}",
        "fedavg", "no_dispersion", "scaffold"
    );
    println!(
        "      | {:>12} {:>11} | {:>12} {:>11} | {:>12} {:>11}",
        "loss", "client_var", "loss", "client_var", "loss", "client_var"
    );
    let checkpoints = runs[0].1.rows.len();
    for i in 0..checkpoints {
        let mut line = format!("{:>5} ", runs[0].1.rows[i].round);
        for (_, out) in &runs {
            let r = &out.rows[i];
            line.push_str(&format!(
                "| {:>12.6} {:>11.4e} ",
                r.train_loss.unwrap(),
                r.client_grad_var.unwrap()
            ));
        }
        println!("{line}");
    }

    let finals: Vec<f64> = runs
        .iter()
        .map(|(_, out)| out.rows.last().unwrap().train_loss.unwrap())
        .collect();
    println!(
        "\nfinal losses: fedavg {:.6}, no_dispersion {:.6} ({:.2}% lower), scaffold {:.6}",
        finals[0],
        finals[1],
        100.0 * (1.0 - finals[1] / finals[0]),
        finals[2]
    );
    Ok(())
}
