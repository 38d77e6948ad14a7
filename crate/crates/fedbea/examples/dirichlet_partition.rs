//! Dirichlet non-IID partitioning at different concentrations.
//!
//! Splits a blobs dataset across clients with alpha = 100 (near IID) and
//! alpha = 0.2 (strongly non-IID) and prints each client's class histogram.
//!
//! Run with: cargo run --release --example dirichlet_partition

use fedbea::data::{dirichlet_partition, synth_blobs, PartitionSpec};

fn main() -> fedbea::Result<()> {
    let (ds, _) = synth_blobs(8, 4, 2, 800, 1.0, 6.0, 21)?;
    for alpha in [100.0, 0.2] {
        let shards = dirichlet_partition(
            &ds,
            &PartitionSpec {
                num_clients: 8,
                alpha,
                seed: 21,
            },
        )?;
        println!("\nalpha = {alpha}");
        println!("client |  size | class counts");
        for shard in &shards {
            let mut counts = vec![0usize; ds.num_classes];
            for &i in &shard.indices {
                counts[ds.labels[i]] += 1;
            }
            println!("{:>6} | {:>5} | {:?}", shard.client_id, shard.len(), counts);
        }
        let covered: usize = shards.iter().map(|s| s.len()).sum();
        println!("covered {covered} of {} examples", ds.len());
    }
    Ok(())
}
