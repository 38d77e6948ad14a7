//! Dirichlet non-IID partitioning.
//!
//! Each client draws a class-proportion vector from `Dirichlet(alpha * 1_C)`.
//! Within each class, examples are dealt to clients by largest-remainder
//! quota on the normalized client weights, which yields a disjoint exact
//! cover deterministically. Clients left empty are repaired by round-robin
//! donation of one example from the largest shards.

use rand::Rng;
use rand_distr::Distribution;

use crate::data::{ClientShard, Dataset, PartitionSpec};
use crate::error::{Error, Result};
use crate::rng::{domain, stream};

pub fn dirichlet_partition(ds: &Dataset, spec: &PartitionSpec) -> Result<Vec<ClientShard>> {
    let m = spec.num_clients;
    if m == 0 {
        return Err(Error::Config("partition needs at least one client".into()));
    }
    if spec.alpha <= 0.0 {
        return Err(Error::Config(format!(
            "dirichlet alpha must be positive, got {}",
            spec.alpha
        )));
    }
    if ds.len() < m {
        return Err(Error::Config(format!(
            "cannot partition {} examples across {} clients",
            ds.len(),
            m
        )));
    }

    let mut rng = stream(
        spec.seed,
        domain::PARTITION,
        &[m as u64, ds.num_classes as u64],
    );

    // Per-client class proportions.
    let dirichlet = rand_distr::Dirichlet::new(&vec![spec.alpha; ds.num_classes])
        .map_err(|e| Error::Config(format!("invalid dirichlet parameters: {e}")))?;
    let proportions: Vec<Vec<f64>> = (0..m).map(|_| dirichlet.sample(&mut rng)).collect();

    // Class index pools, shuffled deterministically so the deal order carries
    // no dataset-order bias.
    let mut class_pools: Vec<Vec<usize>> = vec![Vec::new(); ds.num_classes];
    for (i, &y) in ds.labels.iter().enumerate() {
        class_pools[y].push(i);
    }
    for pool in &mut class_pools {
        for i in (1..pool.len()).rev() {
            let j = rng.gen_range(0..=i);
            pool.swap(i, j);
        }
    }

    let mut shards: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (c, pool) in class_pools.iter().enumerate() {
        if pool.is_empty() {
            continue;
        }
        let total_weight: f64 = proportions.iter().map(|p| p[c]).sum();
        let quotas: Vec<f64> = proportions
            .iter()
            .map(|p| p[c] / total_weight * pool.len() as f64)
            .collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let assigned: usize = counts.iter().sum();
        // distribute the remainder by largest fractional part, ties by id
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            let fa = quotas[a] - quotas[a].floor();
            let fb = quotas[b] - quotas[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &j in order.iter().take(pool.len() - assigned) {
            counts[j] += 1;
        }
        let mut cursor = 0;
        for (j, &count) in counts.iter().enumerate() {
            shards[j].extend_from_slice(&pool[cursor..cursor + count]);
            cursor += count;
        }
    }

    // Repair empty clients: donate one example from the largest shard, round
    // robin, so every client ends non-empty.
    while let Some(empty) = shards.iter().position(|s| s.is_empty()) {
        let donor = shards
            .iter()
            .enumerate()
            .max_by_key(|(_, s)| s.len())
            .map(|(j, _)| j)
            .unwrap();
        if shards[donor].len() <= 1 {
            return Err(Error::Config(
                "partition repair failed: not enough examples to cover all clients".into(),
            ));
        }
        let moved = shards[donor].pop().unwrap();
        shards[empty].push(moved);
    }

    for shard in &mut shards {
        shard.sort_unstable();
    }

    Ok(shards
        .into_iter()
        .enumerate()
        .map(|(client_id, indices)| ClientShard { client_id, indices })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_dataset(n: usize, classes: usize) -> Dataset {
        Dataset {
            examples: (0..n).map(|i| vec![i as f64]).collect(),
            labels: (0..n).map(|i| i % classes).collect(),
            num_classes: classes,
        }
    }

    #[test]
    fn partition_is_deterministic() {
        let ds = toy_dataset(100, 4);
        let spec = PartitionSpec {
            num_clients: 7,
            alpha: 0.3,
            seed: 42,
        };
        assert_eq!(
            dirichlet_partition(&ds, &spec).unwrap(),
            dirichlet_partition(&ds, &spec).unwrap()
        );
    }

    #[test]
    fn single_client_takes_everything() {
        let ds = toy_dataset(17, 3);
        let spec = PartitionSpec {
            num_clients: 1,
            alpha: 0.5,
            seed: 1,
        };
        let shards = dirichlet_partition(&ds, &spec).unwrap();
        assert_eq!(shards.len(), 1);
        assert_eq!(shards[0].indices, (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn shards_form_a_disjoint_exact_cover() {
        let ds = toy_dataset(211, 5);
        let spec = PartitionSpec {
            num_clients: 9,
            alpha: 0.2,
            seed: 3,
        };
        let shards = dirichlet_partition(&ds, &spec).unwrap();
        let mut all: Vec<usize> = shards.iter().flat_map(|s| s.indices.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..211).collect::<Vec<_>>());
        assert!(shards.iter().all(|s| !s.is_empty()));
    }

    #[test]
    fn too_few_examples_is_an_error() {
        let ds = toy_dataset(3, 2);
        let spec = PartitionSpec {
            num_clients: 5,
            alpha: 1.0,
            seed: 0,
        };
        assert!(dirichlet_partition(&ds, &spec).is_err());
    }

    #[test]
    fn high_alpha_is_nearly_uniform() {
        // alpha=100 draws proportions close to the global class balance.
        let ds = toy_dataset(10_000, 10);
        let spec = PartitionSpec {
            num_clients: 100,
            alpha: 100.0,
            seed: 7,
        };
        let shards = dirichlet_partition(&ds, &spec).unwrap();
        for shard in &shards {
            let mut counts = vec![0usize; 10];
            for &i in &shard.indices {
                counts[ds.labels[i]] += 1;
            }
            for &count in &counts {
                let prop = count as f64 / shard.len() as f64;
                assert!(
                    (prop - 0.1).abs() <= 0.05,
                    "client {} class proportion {prop} strays from 0.1",
                    shard.client_id
                );
            }
        }
    }
}
