//! Datasets, partitioning, synthetic task generation, and batch scheduling.

mod csv;
mod partition;
mod schedule;
mod synth;

pub use csv::load_csv_dataset;
pub use partition::dirichlet_partition;
pub use schedule::batch_schedule;
pub use synth::{duplicate_client, synth_blobs, synth_quadratic_tasks, synth_quadratic_tasks_with};

use crate::error::{Error, Result};
use crate::models::{BatchId, LabeledBatch};

/// A labeled dataset held in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub examples: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.examples.first().map_or(0, |x| x.len())
    }

    /// One singleton batch per example, for per-sample gradient statistics.
    pub fn singleton_batches(&self) -> Vec<LabeledBatch> {
        (0..self.len())
            .map(|i| LabeledBatch {
                id: BatchId {
                    client: 0,
                    index: i,
                },
                inputs: vec![self.examples[i].clone()],
                labels: vec![self.labels[i]],
            })
            .collect()
    }

    /// The whole dataset as a single batch.
    pub fn as_single_batch(&self) -> LabeledBatch {
        LabeledBatch {
            id: BatchId {
                client: 0,
                index: 0,
            },
            inputs: self.examples.clone(),
            labels: self.labels.clone(),
        }
    }
}

/// How to split a dataset across clients.
#[derive(Clone, Copy, Debug)]
pub struct PartitionSpec {
    pub num_clients: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// The example indices owned by one client.
#[derive(Clone, Debug, PartialEq)]
pub struct ClientShard {
    pub client_id: usize,
    pub indices: Vec<usize>,
}

impl ClientShard {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Materialize fixed mini-batches of `batch_size` examples.
    ///
    /// Batch membership is fixed at materialization; only the visit order is
    /// reshuffled per epoch. Trailing examples that do not fill a final batch
    /// are dropped, and a shard too small for a single batch is an error.
    pub fn batches(&self, dataset: &Dataset, batch_size: usize) -> Result<Vec<LabeledBatch>> {
        if batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        let full = self.indices.len() / batch_size;
        if full == 0 {
            return Err(Error::Config(format!(
                "client {} has {} examples, fewer than one batch of {}",
                self.client_id,
                self.indices.len(),
                batch_size
            )));
        }
        let mut out = Vec::with_capacity(full);
        for k in 0..full {
            let ids = &self.indices[k * batch_size..(k + 1) * batch_size];
            out.push(LabeledBatch {
                id: BatchId {
                    client: self.client_id,
                    index: k,
                },
                inputs: ids.iter().map(|&i| dataset.examples[i].clone()).collect(),
                labels: ids.iter().map(|&i| dataset.labels[i]).collect(),
            });
        }
        Ok(out)
    }
}

/// The batches owned by one client, in canonical (unshuffled) order.
#[derive(Clone, Debug)]
pub struct ClientData<B> {
    pub client_id: usize,
    pub batches: Vec<B>,
}

impl<B> ClientData<B> {
    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(n: usize) -> Dataset {
        Dataset {
            examples: (0..n).map(|i| vec![i as f64]).collect(),
            labels: vec![0; n],
            num_classes: 1,
        }
    }

    #[test]
    fn batching_drops_trailing_examples() {
        let ds = dataset(10);
        let shard = ClientShard {
            client_id: 0,
            indices: (0..10).collect(),
        };
        let batches = shard.batches(&ds, 3).unwrap();
        assert_eq!(batches.len(), 3);
        assert!(batches.iter().all(|b| b.len() == 3));
        assert_eq!(batches[2].inputs[2], vec![8.0]);
    }

    #[test]
    fn undersized_shard_is_rejected() {
        let ds = dataset(4);
        let shard = ClientShard {
            client_id: 3,
            indices: vec![0, 1],
        };
        let err = shard.batches(&ds, 5).unwrap_err();
        assert!(err.to_string().contains("client 3"));
    }

    #[test]
    fn singleton_batches_cover_each_example_once() {
        let ds = dataset(5);
        let singles = ds.singleton_batches();
        assert_eq!(singles.len(), 5);
        assert!(singles.iter().all(|b| b.len() == 1));
    }
}
