//! `partition` subcommand: Dirichlet-split a CSV dataset and write the
//! client index assignment as JSON.

use std::path::Path;

use serde::Serialize;

use crate::data::{dirichlet_partition, load_csv_dataset, PartitionSpec};
use crate::error::Result;

#[derive(Serialize)]
struct PartitionFile {
    num_clients: usize,
    alpha: f64,
    seed: u64,
    source: String,
    clients: Vec<PartitionEntry>,
}

#[derive(Serialize)]
struct PartitionEntry {
    client_id: usize,
    indices: Vec<usize>,
}

pub fn run_partition(
    data: &Path,
    num_clients: usize,
    alpha: f64,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let dataset = load_csv_dataset(data)?;
    let shards = dirichlet_partition(
        &dataset,
        &PartitionSpec {
            num_clients,
            alpha,
            seed,
        },
    )?;
    let file = PartitionFile {
        num_clients,
        alpha,
        seed,
        source: data.display().to_string(),
        clients: shards
            .into_iter()
            .map(|s| PartitionEntry {
                client_id: s.client_id,
                indices: s.indices,
            })
            .collect(),
    };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(out, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn partition_file_covers_the_dataset() {
        let mut csv = tempfile::NamedTempFile::new().unwrap();
        for i in 0..30 {
            writeln!(csv, "{},{}.0,{}.5", i % 3, i, i).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("partition.json");
        run_partition(csv.path(), 4, 0.5, 9, &out).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let clients = parsed["clients"].as_array().unwrap();
        assert_eq!(clients.len(), 4);
        let total: usize = clients
            .iter()
            .map(|c| c["indices"].as_array().unwrap().len())
            .sum();
        assert_eq!(total, 30);
    }
}
