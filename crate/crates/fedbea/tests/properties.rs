//! Property tests for the structural invariants: partitions cover exactly,
//! schedules are permutations, aggregation ignores input order, quadratic
//! derivatives are exact, and the raw regularizer terms stay non-negative.

// index-based loops keep the hand-rolled matrix oracle explicit
#![allow(clippy::needless_range_loop)]

mod common;

use fedbea::bea::{
    batch_deviation_term, dispersion_term, residual_order_fit, sgd_term, FitOutcome,
};
use fedbea::data::{
    batch_schedule, dirichlet_partition, synth_quadratic_tasks, Dataset, PartitionSpec,
};
use fedbea::fedcore::aggregate;
use fedbea::models::{grad_norm_penalty_gradient, Objective};
use fedbea::param::ParamVector;
use proptest::prelude::*;

use common::probe_point;

fn toy_dataset(n: usize, classes: usize) -> Dataset {
    Dataset {
        examples: (0..n).map(|i| vec![i as f64, (i * i) as f64]).collect(),
        labels: (0..n).map(|i| i % classes).collect(),
        num_classes: classes,
    }
}

proptest! {
    #[test]
    fn partition_is_a_disjoint_exact_cover(
        n in 20usize..200,
        m in 1usize..8,
        alpha in 0.05f64..5.0,
        seed in 0u64..1000,
    ) {
        let ds = toy_dataset(n, 4);
        let shards = dirichlet_partition(&ds, &PartitionSpec { num_clients: m, alpha, seed })
            .unwrap();
        let mut all: Vec<usize> = shards.iter().flat_map(|s| s.indices.clone()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert!(shards.iter().all(|s| !s.is_empty()));
    }

    #[test]
    fn schedule_is_a_deterministic_permutation(
        batches in 1usize..10,
        client in 0usize..20,
        round in 0u64..100,
        epoch in 0usize..10,
        seed in 0u64..1000,
    ) {
        let a = batch_schedule(batches, client, round, epoch, seed).unwrap();
        let b = batch_schedule(batches, client, round, epoch, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..batches).collect::<Vec<_>>());
    }

    #[test]
    fn aggregation_ignores_input_order(
        dim in 1usize..5,
        seeds in proptest::collection::vec(0u64..1_000_000, 1..6),
    ) {
        let params: Vec<(usize, ParamVector)> = seeds
            .iter()
            .enumerate()
            .map(|(id, &s)| (id, probe_point(dim, s)))
            .collect();
        let forward = aggregate(&params).unwrap();
        let mut reversed = params.clone();
        reversed.reverse();
        let backward = aggregate(&reversed).unwrap();
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn quadratic_derivatives_are_exact(
        dim in 1usize..5,
        seed in 0u64..1000,
        w_seed in 0u64..1000,
    ) {
        let (obj, clients) = synth_quadratic_tasks(1, 1, dim, 2.0, seed).unwrap();
        let batch = &clients[0].batches[0];
        let w = probe_point(dim, w_seed);
        // independent closed-form evaluation with explicit loops
        let r: Vec<f64> = (0..dim).map(|i| w[i] - batch.center[i]).collect();
        let mut ar = vec![0.0; dim];
        for i in 0..dim {
            for j in 0..dim {
                ar[i] += batch.matrix.get(i, j) * r[j];
            }
        }
        let loss_by_hand = 0.5 * r.iter().zip(&ar).map(|(a, b)| a * b).sum::<f64>();
        let loss = obj.loss(batch, &w).unwrap();
        prop_assert!((loss - loss_by_hand).abs() <= 1e-12 * loss_by_hand.abs().max(1.0));
        let grad = obj.grad(batch, &w).unwrap();
        for i in 0..dim {
            prop_assert!((grad[i] - ar[i]).abs() <= 1e-12 * ar[i].abs().max(1.0));
        }
    }

    #[test]
    fn penalty_gradient_matches_hvp_on_quadratics(
        dim in 1usize..5,
        seed in 0u64..1000,
        eps in 1e-3f64..1.0,
    ) {
        let (obj, clients) = synth_quadratic_tasks(1, 1, dim, 2.0, seed).unwrap();
        let batch = &clients[0].batches[0];
        let w = probe_point(dim, seed ^ 0xABCD);
        let g = obj.grad(batch, &w).unwrap();
        let exact = obj.hvp(batch, &w, &g).unwrap();
        let fd = grad_norm_penalty_gradient(&obj, batch, &w, eps).unwrap();
        prop_assert!(fd.distance(&exact) <= 1e-9 * exact.norm_l2().max(1.0));
    }

    #[test]
    fn raw_terms_are_nonnegative(
        m in 1usize..5,
        k in 1usize..4,
        dim in 1usize..4,
        s in 0.0f64..5.0,
        seed in 0u64..1000,
    ) {
        let (obj, clients) = synth_quadratic_tasks(m, k, dim, s, seed).unwrap();
        let w = probe_point(dim, seed);
        prop_assert!(dispersion_term(&obj, &clients, &w).unwrap() >= 0.0);
        prop_assert!(sgd_term(&obj, &clients, &w).unwrap() >= 0.0);
        prop_assert!(batch_deviation_term(&obj, &clients, &w).unwrap() >= 0.0);
    }

    #[test]
    fn order_fit_recovers_planted_exponents(
        exponent in 0.5f64..4.0,
        scale in 0.1f64..10.0,
    ) {
        let points: Vec<(f64, f64)> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&eta: &f64| (eta, scale * eta.powf(exponent)))
            .collect();
        match residual_order_fit(&points).unwrap() {
            FitOutcome::Exponent(s) => prop_assert!((s - exponent).abs() < 1e-6),
            FitOutcome::Exact => prop_assert!(scale * 1e-3f64.powf(exponent) <= 1e-12),
        }
    }
}
