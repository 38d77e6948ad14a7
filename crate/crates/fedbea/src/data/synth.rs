//! Synthetic task generators.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{ClientData, Dataset, PartitionSpec};
use crate::error::{Error, Result};
use crate::models::quadratic::random_psd_matrix;
use crate::models::{BatchId, QuadraticBatch, QuadraticObjective};
use crate::param::ParamVector;
use crate::rng::{domain, stream};

/// Heterogeneous quadratic tasks: client `j` gets `batches_per_client`
/// quadratic bowls with centers `nu_j + delta_jk`, where the per-client
/// offsets `nu_j` have spread `client_spread` and the within-client offsets
/// `delta_jk` have spread `batch_spread`. Curvatures are symmetric PSD with
/// eigenvalues in `[0.1, 2]`.
pub fn synth_quadratic_tasks_with(
    num_clients: usize,
    batches_per_client: usize,
    dimension: usize,
    client_spread: f64,
    batch_spread: f64,
    seed: u64,
) -> Result<(QuadraticObjective, Vec<ClientData<QuadraticBatch>>)> {
    if num_clients == 0 || batches_per_client == 0 || dimension == 0 {
        return Err(Error::Config(
            "quadratic task needs clients, batches, and dimension all >= 1".into(),
        ));
    }
    if client_spread < 0.0 || batch_spread < 0.0 {
        return Err(Error::Config("spreads must be non-negative".into()));
    }
    let mut clients = Vec::with_capacity(num_clients);
    for j in 0..num_clients {
        let mut client_rng = stream(seed, domain::SYNTH_QUADRATIC, &[j as u64]);
        let nu: Vec<f64> = (0..dimension)
            .map(|_| client_spread * client_rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut batches = Vec::with_capacity(batches_per_client);
        for k in 0..batches_per_client {
            let mut batch_rng = stream(seed, domain::SYNTH_QUADRATIC, &[j as u64, k as u64]);
            let center: Vec<f64> = nu
                .iter()
                .map(|&v| v + batch_spread * batch_rng.sample::<f64, _>(StandardNormal))
                .collect();
            let matrix = random_psd_matrix(dimension, 0.1, 2.0, &mut batch_rng);
            batches.push(QuadraticBatch::new(
                BatchId {
                    client: j,
                    index: k,
                },
                matrix,
                ParamVector::new(center),
            ));
        }
        clients.push(ClientData {
            client_id: j,
            batches,
        });
    }
    Ok((QuadraticObjective::new(dimension), clients))
}

/// [`synth_quadratic_tasks_with`] with unit within-client spread.
pub fn synth_quadratic_tasks(
    num_clients: usize,
    batches_per_client: usize,
    dimension: usize,
    heterogeneity: f64,
    seed: u64,
) -> Result<(QuadraticObjective, Vec<ClientData<QuadraticBatch>>)> {
    synth_quadratic_tasks_with(
        num_clients,
        batches_per_client,
        dimension,
        heterogeneity,
        1.0,
        seed,
    )
}

/// Replicate one client's batches across `m` clients (the IID degenerate
/// case: identical shards, zero gradient dispersion at every point).
pub fn duplicate_client<B: Clone>(client: &ClientData<B>, m: usize) -> Vec<ClientData<B>> {
    (0..m)
        .map(|j| ClientData {
            client_id: j,
            batches: client.batches.clone(),
        })
        .collect()
}

/// Gaussian class blobs with unit within-class deviation.
///
/// Class centers sit on a circle of radius `separation / 2` through feature
/// space (axis-aligned for one feature), so `separation` is roughly the
/// distance between neighboring centers in units of the class deviation.
/// Returns the dataset together with a partition spec carrying `alpha` and
/// the derived seed.
pub fn synth_blobs(
    num_clients: usize,
    classes: usize,
    features: usize,
    examples: usize,
    alpha: f64,
    separation: f64,
    seed: u64,
) -> Result<(Dataset, PartitionSpec)> {
    if classes < 2 || features == 0 || examples == 0 {
        return Err(Error::Config(
            "blobs need classes >= 2, features >= 1, examples >= 1".into(),
        ));
    }
    let mut rng = stream(
        seed,
        domain::SYNTH_BLOBS,
        &[classes as u64, features as u64, examples as u64],
    );
    // class centers: first two coordinates on a circle, rest zero
    let radius = separation / 2.0;
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|c| {
            let angle = 2.0 * std::f64::consts::PI * c as f64 / classes as f64;
            let mut center = vec![0.0; features];
            center[0] = radius * angle.cos();
            if features > 1 {
                center[1] = radius * angle.sin();
            }
            center
        })
        .collect();
    let mut data = Vec::with_capacity(examples);
    let mut labels = Vec::with_capacity(examples);
    for i in 0..examples {
        let y = i % classes;
        let x: Vec<f64> = centers[y]
            .iter()
            .map(|&c| c + rng.sample::<f64, _>(StandardNormal))
            .collect();
        data.push(x);
        labels.push(y);
    }
    Ok((
        Dataset {
            examples: data,
            labels,
            num_classes: classes,
        },
        PartitionSpec {
            num_clients,
            alpha,
            seed,
        },
    ))
}
