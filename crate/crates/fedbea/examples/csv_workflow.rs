//! From a CSV file to a federated run.
//!
//! Writes a small headerless `label,f1,...,fp` dataset, loads it back,
//! Dirichlet-partitions it across clients, and runs a few SCAFFOLD rounds,
//! printing the loss trajectory.
//!
//! Run with: cargo run --release --example csv_workflow

use fedbea::cli::{simulate_to_rows, ModelKind, RunConfig, TaskKind};
use fedbea::data::{load_csv_dataset, synth_blobs};
use fedbea::fedcore::AlgorithmVariant;

fn main() -> fedbea::Result<()> {
    // materialize a blobs dataset as CSV
    let (ds, _) = synth_blobs(1, 3, 2, 600, 1.0, 5.0, 31)?;
    let mut text = String::new();
    for (x, y) in ds.examples.iter().zip(&ds.labels) {
        text.push_str(&format!("{y},{},{}\n", x[0], x[1]));
    }
    let dir = std::env::temp_dir().join("fedbea_csv_workflow");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("blobs.csv");
    std::fs::write(&path, text)?;

    let loaded = load_csv_dataset(&path)?;
    println!(
        "loaded {} examples, {} features, {} classes from {}",
        loaded.len(),
        loaded.num_features(),
        loaded.num_classes,
        path.display()
    );

    let config = RunConfig {
        algorithm: AlgorithmVariant::Scaffold,
        task: TaskKind::Csv,
        m: 6,
        a: 2,
        k: 8,
        eta: 0.01,
        rounds: 40,
        batch_size: 10,
        participation: 1.0,
        alpha: 0.4,
        heterogeneity: 1.0,
        seed: 31,
        eps_policy: None,
        metric_cadence: 5,
        eval_threshold: None,
        dimension: 8,
        classes: 3,
        features: 2,
        examples: 600,
        separation: 5.0,
        hidden: 8,
        csv_path: Some(path),
        model: ModelKind::SoftmaxLinear,
    };
    let outcome = simulate_to_rows(&config)?;
    println!("\nround | train loss | accuracy");
    for row in &outcome.rows {
        println!(
            "{:>5} | {:>10.6} | {:>8.4}",
            row.round,
            row.train_loss.unwrap(),
            row.eval_metric.unwrap()
        );
    }
    Ok(())
}
